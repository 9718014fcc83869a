//! Empirical checks of uniform local connectivity on solved domains.

use serde::Serialize;

use crate::bounds::{Chi, KappaSequence};
use crate::error::{Error, Result};
use crate::geometry::{BlockedCircleDomain, CircleDomain};

/// Radii, arc angles and channel depths of a circle or blocked circle domain.
pub trait UlcDomain {
    fn radii(&self) -> &[f64];
    fn psi(&self) -> &[f64];
    /// `η_{j,k}` for circle domains, `θ_{j,k}` for blocked ones.
    fn depth(&self, j: usize, k: usize) -> f64;
    fn shortest_arc_depth(&self, j: usize, k: usize) -> f64;
}

impl UlcDomain for CircleDomain<f64> {
    fn radii(&self) -> &[f64] {
        CircleDomain::radii(self)
    }
    fn psi(&self) -> &[f64] {
        CircleDomain::psi(self)
    }
    fn depth(&self, j: usize, k: usize) -> f64 {
        self.eta(j, k).unwrap()
    }
    fn shortest_arc_depth(&self, j: usize, k: usize) -> f64 {
        self.eta(j, k).unwrap()
    }
}

impl UlcDomain for BlockedCircleDomain<f64> {
    fn radii(&self) -> &[f64] {
        self.base().radii()
    }
    fn psi(&self) -> &[f64] {
        self.base().psi()
    }
    fn depth(&self, j: usize, k: usize) -> f64 {
        self.theta(j, k).unwrap()
    }
    fn shortest_arc_depth(&self, j: usize, k: usize) -> f64 {
        self.eta(j, k).unwrap()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UlcViolation {
    pub n: usize,
    pub eps: f64,
    pub j: usize,
    pub k: usize,
    /// `"depth"` for `θ_{j,k} ≥ ε`, `"radial"` for `M − r_k ≥ ε`.
    pub kind: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UlcRow {
    pub eps: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub depth_pairs: usize,
    pub radial_arcs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UlcReport {
    pub rows: Vec<UlcRow>,
    pub violations: Vec<UlcViolation>,
    /// Largest `η_{j,k} / χ_∞(r_k − r_j)` over all domains and pairs.
    pub max_eta_ratio: f64,
    /// Largest `θ_{j,k} / (χ_∞(r_k − r_j) + κ_n)`.
    pub max_theta_ratio: f64,
    /// Largest `(M − r_k) / (((M − μ)/(απ)) (π − ψ_k))`.
    pub max_radial_ratio: f64,
}

impl UlcReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
            && self.max_eta_ratio <= 1.0
            && self.max_theta_ratio <= 1.0
            && self.max_radial_ratio <= 1.0
    }
}

/// `δ₂(ε) = απε/(M − μ)`.
pub fn delta2(c: &Chi<f64>, eps: f64) -> f64 {
    c.alpha * std::f64::consts::PI * eps / (c.big_m - c.mu)
}

/// Largest `N` with `κ_N ≥ x`, or 1 if `κ_n < x` for every `n > 1`.
fn kappa_index(seq: &KappaSequence<f64>, x: f64) -> usize {
    // κ_n increases up to n = 3 and decreases after
    if seq.kappa(2) < x && seq.kappa(3) < x {
        return 1;
    }
    let mut hi = 4;
    while seq.kappa(hi) >= x {
        hi *= 2;
    }
    let mut lo = 3;
    if seq.kappa(lo) < x {
        return 2;
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if seq.kappa(mid) >= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `δ₁(ε) = min(δ₁'(ε/2), (M − μ)/N_κ(ε))` with `δ₁' = χ_∞⁻¹`.
pub fn delta1(c: &Chi<f64>, seq: &KappaSequence<f64>, eps: f64) -> Result<f64> {
    let d = c.chi_inf_inverse(eps / 2.0)?;
    Ok(d.min((c.big_m - c.mu) / kappa_index(seq, eps / 2.0) as f64))
}

/// Checks, for every `ε` in `eps_grid` and every domain, that
/// `r_k − r_j < δ₁(ε) ⇒ depth_{j,k} < ε` and `π − ψ_k < δ₂(ε) ⇒ M − r_k < ε`,
/// and records the extremal ratios to the χ_∞ and radial bounds.
pub fn ulc_diagnostics<D: UlcDomain>(domains: &[(usize, &D)], c: &Chi<f64>, eps_grid: &[f64]) -> Result<UlcReport> {
    if eps_grid.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::OutOfRange("eps must be positive".into()));
    }
    let seq = KappaSequence::new(c.mu, c.big_m)?;
    let pi = std::f64::consts::PI;
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for &eps in eps_grid {
        let d1 = delta1(c, &seq, eps)?;
        let d2 = delta2(c, eps);
        let (mut depth_pairs, mut radial_arcs) = (0, 0);
        for &(n, d) in domains {
            let (r, psi) = (d.radii(), d.psi());
            let m = *r.last().unwrap();
            for k in 0..r.len() {
                if pi - psi[k] < d2 {
                    radial_arcs += 1;
                    if m - r[k] >= eps {
                        violations.push(UlcViolation { n, eps, j: k, k, kind: "radial", value: m - r[k] });
                    }
                }
                for j in 0..k {
                    if r[k] - r[j] < d1 {
                        depth_pairs += 1;
                        let t = d.depth(j, k);
                        if t >= eps {
                            violations.push(UlcViolation { n, eps, j, k, kind: "depth", value: t });
                        }
                    }
                }
            }
        }
        rows.push(UlcRow { eps, delta1: d1, delta2: d2, depth_pairs, radial_arcs });
    }
    let (mut eta_ratio, mut theta_ratio, mut radial_ratio) = (0.0f64, 0.0f64, 0.0f64);
    for &(n, d) in domains {
        let (r, psi) = (d.radii(), d.psi());
        let m = *r.last().unwrap();
        let kappa = seq.kappa(n);
        for k in 0..r.len() {
            if psi[k] < pi {
                radial_ratio = radial_ratio.max((m - r[k]) / c.radial_bound(psi[k])?);
            }
            for j in 0..k {
                let gap = (r[k] - r[j]).min(c.big_m - c.mu);
                let bound = c.chi_inf(gap)?;
                eta_ratio = eta_ratio.max(d.shortest_arc_depth(j, k) / bound);
                theta_ratio = theta_ratio.max(d.depth(j, k) / (bound + kappa));
            }
        }
    }
    Ok(UlcReport {
        rows,
        violations,
        max_eta_ratio: eta_ratio,
        max_theta_ratio: theta_ratio,
        max_radial_ratio: radial_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const GRID: [f64; 4] = [0.5, 0.2, 0.1, 0.05];

    #[test]
    fn single_arc_passes() {
        let c = Chi::new(0.5, 1.0, 2.0).unwrap();
        let x = CircleDomain::disk(2.0).unwrap();
        let rep = ulc_diagnostics(&[(1, &x)], &c, &GRID).unwrap();
        assert!(rep.passed());
        assert!(rep.rows.iter().all(|r| r.depth_pairs == 0));
    }

    #[test]
    fn deltas() {
        let c = Chi::new(0.5, 1.0, 1.0992).unwrap();
        let seq = KappaSequence::new(1.0, 1.0992).unwrap();
        assert!((delta2(&c, 0.1) - 0.5 * PI * 0.1 / (1.0992f64 - 1.0)).abs() < 1e-15);
        let d = delta1(&c, &seq, 0.01).unwrap();
        assert!(c.chi_inf(d).unwrap() <= 0.005 + 1e-15);
        // κ_n < 0.005 needs n beyond a few hundred
        assert!(seq.kappa(kappa_index(&seq, 0.005)) >= 0.005);
        assert!(seq.kappa(kappa_index(&seq, 0.005) + 1) < 0.005);
        assert_eq!(kappa_index(&seq, 1.0), 1);
    }

    #[test]
    fn flags_a_deep_notch() {
        // a short arc between two long ones at nearly equal radii
        let x = CircleDomain::new(vec![1.0, 1.0001, 1.0002, 2.0], vec![2.5, 0.1, 2.5, PI]).unwrap();
        let c = Chi::new(0.5, 1.0, 2.0).unwrap();
        let rep = ulc_diagnostics(&[(3, &x)], &c, &GRID).unwrap();
        assert!(rep.max_eta_ratio > 1.0);
        assert!(!rep.passed());
        assert!(rep.violations.iter().any(|v| v.kind == "depth" && v.j == 0 && v.k == 2));
    }

    #[test]
    fn gates_enter_through_theta() {
        let x = CircleDomain::new(vec![1.0, 1.5, 2.0], vec![1.0, 1.2, PI]).unwrap();
        let o = BlockedCircleDomain::from_insets(x, &[0.2, 0.3]).unwrap();
        let c = Chi::new(0.5, 1.0, 2.0).unwrap();
        let rep = ulc_diagnostics(&[(2, &o)], &c, &GRID).unwrap();
        assert!(rep.max_theta_ratio > 0.0);
        assert_eq!(rep.rows.len(), GRID.len());
    }
}
