//! Circle domains, blocked circle domains and exact boundary distances.
//!
//! A circle domain is the disk `B(0, r_n)` minus closed arcs `A_k` of radius
//! `r_k` and half-arclength `ψ_k`, each symmetric about the positive real
//! axis. A blocked circle domain additionally removes the radial gates at
//! angles `±φ_k` joining `A_k` to `A_{k+1}`, together with the pockets they
//! close off around the positive real axis.

use std::fmt;
use std::ops::Sub;

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A closed arc `{r e^{it} : |t| ≤ ψ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc<T> {
    pub radius: T,
    pub half_arclength: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    Arc,
    OuterCircle,
    Gate,
}

/// The boundary piece nearest to a query point, with the modulus of the
/// nearest point on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryFeature<T> {
    pub kind: FeatureKind,
    pub index: usize,
    pub modulus: T,
}

/// A structural problem found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    LengthMismatch { expected: usize, found: usize },
    NonFinite { index: usize },
    NonPositiveRadius { index: usize },
    RadiiNotIncreasing { index: usize },
    AngleOutOfRange { index: usize },
    InnerArcFullCircle { index: usize },
    OuterNotFullCircle,
    GateOutOfRange { index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "domain has no boundary circle"),
            Violation::LengthMismatch { expected, found } => {
                write!(f, "expected {expected} angles, found {found}")
            }
            Violation::NonFinite { index } => write!(f, "non-finite value at index {index}"),
            Violation::NonPositiveRadius { index } => {
                write!(f, "radius {index} is not positive")
            }
            Violation::RadiiNotIncreasing { index } => {
                write!(f, "radii not increasing at index {index}")
            }
            Violation::AngleOutOfRange { index } => {
                write!(f, "half-arclength {index} outside [0, pi]")
            }
            Violation::InnerArcFullCircle { index } => {
                write!(f, "inner arc {index} is a full circle")
            }
            Violation::OuterNotFullCircle => write!(f, "outer boundary not full circle"),
            Violation::GateOutOfRange { index } => {
                write!(f, "gate angle {index} outside [0, min(psi_k, psi_k+1)]")
            }
        }
    }
}

/// A valid but noteworthy property found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Note {
    CapacityZeroArc { index: usize },
}

impl fmt::Display for Note {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Note::CapacityZeroArc { index } => {
                write!(f, "arc {index} is a single point (capacity-zero feature)")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Validation {
    pub violations: Vec<Violation>,
    pub notes: Vec<Note>,
    /// Symmetry about the real axis holds for every parametric domain here.
    pub symmetric: bool,
    /// `None` for plain circle domains, which are multiply connected.
    pub simply_connected: Option<bool>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks radii, half-arclengths and (optionally) gate angles.
pub fn validate<T: Real>(radii: &[T], psi: &[T], phi: Option<&[T]>) -> Validation {
    let mut violations = Vec::new();
    let mut notes = Vec::new();
    let pi = T::PI();
    if radii.is_empty() {
        violations.push(Violation::Empty);
    }
    if psi.len() != radii.len() {
        violations.push(Violation::LengthMismatch { expected: radii.len(), found: psi.len() });
    }
    for (i, &r) in radii.iter().enumerate() {
        if !r.is_finite() {
            violations.push(Violation::NonFinite { index: i });
        } else if r <= T::zero() {
            violations.push(Violation::NonPositiveRadius { index: i });
        }
        if i > 0 && !(radii[i - 1] < r) {
            violations.push(Violation::RadiiNotIncreasing { index: i });
        }
    }
    let n = radii.len().saturating_sub(1);
    for (i, &p) in psi.iter().enumerate() {
        if !p.is_finite() || p < T::zero() || p > pi {
            violations.push(Violation::AngleOutOfRange { index: i });
            continue;
        }
        if i < n && p == pi {
            violations.push(Violation::InnerArcFullCircle { index: i });
        }
        if i < n && p == T::zero() {
            notes.push(Note::CapacityZeroArc { index: i });
        }
    }
    if psi.len() == radii.len() && !psi.is_empty() && psi[n] != pi {
        violations.push(Violation::OuterNotFullCircle);
    }
    let simply_connected = phi.map(|phi| {
        if phi.len() != n {
            violations.push(Violation::LengthMismatch { expected: n, found: phi.len() });
            return false;
        }
        let mut ok = true;
        for (k, &g) in phi.iter().enumerate() {
            let cap = if psi.len() == radii.len() && k + 1 < psi.len() {
                min(psi[k], psi[k + 1])
            } else {
                pi
            };
            if !g.is_finite() || g < T::zero() || g > cap {
                violations.push(Violation::GateOutOfRange { index: k });
                ok = false;
            }
        }
        ok
    });
    let simply_connected = simply_connected.map(|ok| ok && violations.is_empty());
    Validation { violations, notes, symmetric: true, simply_connected }
}

fn min<T: PartialOrd>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

fn invalid(v: &Validation) -> Error {
    let msgs: Vec<String> = v.violations.iter().map(|x| x.to_string()).collect();
    Error::InvalidDomain(msgs.join("; "))
}

/// Channel quantities that only need ordering and subtraction, so they also
/// run on exact rationals.
pub mod channel {
    use super::*;

    fn check(len: usize, j: usize, k: usize) -> Result<()> {
        if j < k && k < len {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange(format!("need 0 <= j < k <= {}, got ({j}, {k})", len - 1)))
        }
    }

    fn min_of<T: Clone + PartialOrd>(xs: &[T]) -> T {
        let mut m = xs[0].clone();
        for x in &xs[1..] {
            if *x < m {
                m = x.clone();
            }
        }
        m
    }

    /// `η(j,k) = min(ψ_j, ψ_k) − min_{j≤l≤k} ψ_l`.
    pub fn eta<T: Clone + PartialOrd + Sub<Output = T>>(psi: &[T], j: usize, k: usize) -> Result<T> {
        check(psi.len(), j, k)?;
        let ends = min(psi[j].clone(), psi[k].clone());
        Ok(ends - min_of(&psi[j..=k]))
    }

    /// `θ(j,k) = min(ψ_j, ψ_k) − min_{j≤l<k} φ_l`.
    pub fn theta<T: Clone + PartialOrd + Sub<Output = T>>(
        psi: &[T],
        phi: &[T],
        j: usize,
        k: usize,
    ) -> Result<T> {
        check(psi.len(), j, k)?;
        if phi.len() + 1 != psi.len() {
            return Err(Error::IndexOutOfRange("gate count must be one less than arc count".into()));
        }
        let ends = min(psi[j].clone(), psi[k].clone());
        Ok(ends - min_of(&phi[j..k]))
    }

    /// `χ_k = min(ψ_k, ψ_{k+1}) − φ_k` for every gate.
    pub fn insets<T: Clone + PartialOrd + Sub<Output = T>>(psi: &[T], phi: &[T]) -> Vec<T> {
        phi.iter()
            .enumerate()
            .map(|(k, g)| min(psi[k].clone(), psi[k + 1].clone()) - g.clone())
            .collect()
    }

    /// `max_{j≤l<k} χ_l`.
    pub fn max_inset<T: Clone + PartialOrd + Sub<Output = T>>(
        psi: &[T],
        phi: &[T],
        j: usize,
        k: usize,
    ) -> Result<T> {
        check(psi.len(), j, k)?;
        let chi = insets(&psi[j..=k], &phi[j..k]);
        let mut m = chi[0].clone();
        for c in &chi[1..] {
            if *c > m {
                m = c.clone();
            }
        }
        Ok(m)
    }
}

/// Exact boundary geometry used by the walk-on-spheres engine.
pub trait Domain<T: Real>: Sync {
    fn outer_radius(&self) -> T;

    /// Nearest boundary feature and its distance. Capacity-zero point arcs
    /// are ignored when `skip_points` is set.
    fn nearest(&self, z: Complex<T>, skip_points: bool) -> (T, BoundaryFeature<T>);

    fn contains(&self, z: Complex<T>) -> bool;

    fn distance_to_boundary(&self, z: Complex<T>) -> Result<(T, BoundaryFeature<T>)> {
        if !self.contains(z) {
            return Err(Error::NotInterior);
        }
        Ok(self.nearest(z, false))
    }
}

/// Disk minus finitely many concentric arcs symmetric about the positive
/// real axis. The last arc is the full outer circle.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleDomain<T> {
    radii: Vec<T>,
    psi: Vec<T>,
    tips: Vec<(T, T)>,
}

impl<T: Real> CircleDomain<T> {
    pub fn new(radii: Vec<T>, psi: Vec<T>) -> Result<Self> {
        let v = validate(&radii, &psi, None);
        if !v.is_valid() {
            return Err(invalid(&v));
        }
        let tips = radii.iter().zip(&psi).map(|(&r, &p)| (r * p.cos(), r * p.sin())).collect();
        Ok(CircleDomain { radii, psi, tips })
    }

    /// The disk `B(0, radius)`.
    pub fn disk(radius: T) -> Result<Self> {
        Self::new(vec![radius], vec![T::PI()])
    }

    /// Index of the outer circle.
    pub fn n(&self) -> usize {
        self.radii.len() - 1
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn psi(&self) -> &[T] {
        &self.psi
    }

    pub fn arc(&self, k: usize) -> Arc<T> {
        Arc { radius: self.radii[k], half_arclength: self.psi[k] }
    }

    pub fn arcs(&self) -> Vec<Arc<T>> {
        (0..self.radii.len()).map(|k| self.arc(k)).collect()
    }

    pub fn inner_radius(&self) -> T {
        self.radii[0]
    }

    pub fn eta(&self, j: usize, k: usize) -> Result<T> {
        channel::eta(&self.psi, j, k)
    }

    pub fn validate(&self) -> Validation {
        validate(&self.radii, &self.psi, None)
    }

    fn nearest_arc(&self, x: T, y: T, rho: T, theta: T, skip_points: bool) -> (T, BoundaryFeature<T>) {
        let n = self.n();
        let mut best = (self.radii[n] - rho, BoundaryFeature {
            kind: FeatureKind::OuterCircle,
            index: n,
            modulus: self.radii[n],
        });
        let mut best_arc: Option<(T, usize)> = None;
        for k in 0..n {
            let p = self.psi[k];
            if skip_points && p == T::zero() {
                continue;
            }
            let d = if theta <= p {
                (rho - self.radii[k]).abs()
            } else {
                let (tx, ty) = self.tips[k];
                (x - tx).hypot(y - ty)
            };
            if best_arc.is_none_or(|(b, _)| d < b) {
                best_arc = Some((d, k));
            }
        }
        if let Some((d, k)) = best_arc {
            if d <= best.0 {
                best = (d, BoundaryFeature { kind: FeatureKind::Arc, index: k, modulus: self.radii[k] });
            }
        }
        best
    }
}

fn fold<T: Real>(z: Complex<T>) -> (T, T, T, T) {
    let x = z.re;
    let y = z.im.abs();
    (x, y, x.hypot(y), y.atan2(x))
}

impl<T: Real> Domain<T> for CircleDomain<T> {
    fn outer_radius(&self) -> T {
        self.radii[self.n()]
    }

    fn nearest(&self, z: Complex<T>, skip_points: bool) -> (T, BoundaryFeature<T>) {
        let (x, y, rho, theta) = fold(z);
        self.nearest_arc(x, y, rho, theta, skip_points)
    }

    fn contains(&self, z: Complex<T>) -> bool {
        if !(z.norm() < self.outer_radius()) {
            return false;
        }
        self.nearest(z, false).0 > T::zero()
    }
}

/// A circle domain with radial gates at angles `±φ_k` between consecutive
/// arcs; the pocket `{r_k ≤ |z| ≤ r_{k+1}, |arg z| ≤ φ_k}` is removed.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockedCircleDomain<T> {
    base: CircleDomain<T>,
    phi: Vec<T>,
    chi: Vec<T>,
    gate_dirs: Vec<(T, T)>,
}

impl<T: Real> BlockedCircleDomain<T> {
    pub fn new(base: CircleDomain<T>, phi: Vec<T>) -> Result<Self> {
        let v = validate(&base.radii, &base.psi, Some(&phi));
        if !v.is_valid() {
            return Err(invalid(&v));
        }
        let chi = channel::insets(&base.psi, &phi);
        let gate_dirs = phi.iter().map(|&g| (g.cos(), g.sin())).collect();
        Ok(BlockedCircleDomain { base, phi, chi, gate_dirs })
    }

    /// Builds the domain from inset angles `χ_k`, so `φ_k = min(ψ_k, ψ_{k+1}) − χ_k`.
    pub fn from_insets(base: CircleDomain<T>, chi: &[T]) -> Result<Self> {
        let psi = base.psi();
        if chi.len() != base.n() {
            return Err(Error::InvalidDomain(format!("expected {} insets", base.n())));
        }
        let phi = chi.iter().enumerate().map(|(k, &c)| min(psi[k], psi[k + 1]) - c).collect();
        let mut d = Self::new(base, phi)?;
        // keep the requested insets rather than the rounded difference
        d.chi = chi.to_vec();
        Ok(d)
    }

    pub fn base(&self) -> &CircleDomain<T> {
        &self.base
    }

    pub fn gate_angles(&self) -> &[T] {
        &self.phi
    }

    pub fn insets(&self) -> &[T] {
        &self.chi
    }

    pub fn theta(&self, j: usize, k: usize) -> Result<T> {
        channel::theta(&self.base.psi, &self.phi, j, k)
    }

    pub fn eta(&self, j: usize, k: usize) -> Result<T> {
        self.base.eta(j, k)
    }

    pub fn validate(&self) -> Validation {
        validate(&self.base.radii, &self.base.psi, Some(&self.phi))
    }

    /// True for points strictly inside a removed pocket.
    pub fn in_pocket(&self, z: Complex<T>) -> bool {
        let (_, _, rho, theta) = fold(z);
        let r = &self.base.radii;
        (0..self.phi.len()).any(|k| r[k] < rho && rho < r[k + 1] && theta < self.phi[k])
    }
}

impl<T: Real> Domain<T> for BlockedCircleDomain<T> {
    fn outer_radius(&self) -> T {
        self.base.outer_radius()
    }

    fn nearest(&self, z: Complex<T>, skip_points: bool) -> (T, BoundaryFeature<T>) {
        let (x, y, rho, theta) = fold(z);
        let mut best = self.base.nearest_arc(x, y, rho, theta, skip_points);
        let r = &self.base.radii;
        for (k, &(c, s)) in self.gate_dirs.iter().enumerate() {
            let t = (x * c + y * s).max(r[k]).min(r[k + 1]);
            let d = (x - t * c).hypot(y - t * s);
            if d < best.0 {
                best = (d, BoundaryFeature { kind: FeatureKind::Gate, index: k, modulus: t });
            }
        }
        best
    }

    fn contains(&self, z: Complex<T>) -> bool {
        self.base.contains(z) && !self.in_pocket(z) && self.nearest(z, false).0 > T::zero()
    }
}

/// The disk `B(a, R)` with `|a| < R`, which contains the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffCenterDisk<T> {
    pub center: Complex<T>,
    pub radius: T,
}

impl<T: Real> OffCenterDisk<T> {
    pub fn new(center: Complex<T>, radius: T) -> Result<Self> {
        if !(center.norm() < radius) || !radius.is_finite() {
            return Err(Error::InvalidDomain("need |a| < R".into()));
        }
        Ok(OffCenterDisk { center, radius })
    }
}

impl<T: Real> Domain<T> for OffCenterDisk<T> {
    fn outer_radius(&self) -> T {
        self.center.norm() + self.radius
    }

    fn nearest(&self, z: Complex<T>, _skip_points: bool) -> (T, BoundaryFeature<T>) {
        let w = z - self.center;
        let dist = w.norm();
        let dir = if dist > T::zero() { w / dist } else { Complex::new(T::one(), T::zero()) };
        let p = self.center + dir * self.radius;
        let feature = BoundaryFeature { kind: FeatureKind::OuterCircle, index: 0, modulus: p.norm() };
        (self.radius - dist, feature)
    }

    fn contains(&self, z: Complex<T>) -> bool {
        (z - self.center).norm() < self.radius
    }
}
