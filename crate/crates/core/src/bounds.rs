//! Closed-form estimates: the fjump thresholds, the κ rule, channel and
//! gate bounds, the arc-length lower bound and the χ functions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::BlockedCircleDomain;
use crate::scalar::Real;

/// A bound value. `vacuous` marks upper bounds above 1 (or lower bounds not
/// above 0), which say nothing about a harmonic measure or angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bound<T> {
    pub value: T,
    pub vacuous: bool,
}

impl<T: Real> Bound<T> {
    fn upper(value: T) -> Self {
        Bound { value, vacuous: value > T::one() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds<T> {
    pub m1: T,
    pub m2: T,
    pub m3: T,
    /// `|g(m3) − πβ|`.
    pub g_residual: T,
}

impl<T: Real> Thresholds<T> {
    pub fn m0(&self) -> T {
        self.m1.min(self.m2).min(self.m3)
    }
}

fn log_256_over_pi_alpha<T: Real>(alpha: T) -> T {
    (T::lit(256.0) / (T::PI() * alpha)).ln()
}

/// `g(m) = (2/π) m (2 log(1 + 1/m) + π²) + (4/π) m log(256/(πα))`.
pub fn g<T: Real>(m: T, alpha: T) -> T {
    let pi = T::PI();
    let two = T::lit(2.0);
    two / pi * m * (two * (T::one() + m.recip()).ln() + pi * pi)
        + T::lit(4.0) / pi * m * log_256_over_pi_alpha(alpha)
}

pub fn thresholds<T: Real>(alpha: T, beta: T) -> Result<Thresholds<T>> {
    let open = |x: T| x > T::zero() && x < T::one();
    if !open(alpha) || !open(beta) {
        return Err(Error::OutOfRange("need alpha, beta in (0, 1)".into()));
    }
    let pi = T::PI();
    let m1 = (T::E() - T::one()).recip();
    let m2 = pi * pi / (T::lit(8.0) * log_256_over_pi_alpha(alpha));
    let target = pi * beta;
    let (mut lo, mut hi) = (T::lit(1e-12), T::one());
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        if g(mid, alpha) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let m3 = (lo + hi) * T::lit(0.5);
    Ok(Thresholds { m1, m2, m3, g_residual: (g(m3, alpha) - target).abs() })
}

/// The rule `κ_n = ((M − μ)/(μ n)) log n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaSequence<T> {
    pub mu: T,
    pub big_m: T,
}

impl<T: Real> KappaSequence<T> {
    pub fn new(mu: T, big_m: T) -> Result<Self> {
        if !(mu > T::zero() && big_m > mu) {
            return Err(Error::OutOfRange("need 0 < mu < M".into()));
        }
        Ok(KappaSequence { mu, big_m })
    }

    pub fn kappa(&self, n: usize) -> T {
        if n <= 1 {
            return T::zero();
        }
        let nf = T::from_usize(n).unwrap();
        (self.big_m - self.mu) / (self.mu * nf) * nf.ln()
    }

    /// `n exp(−πμ n κ_n / (2(M − μ)))`, which is `n^{1 − π/2}` for this rule.
    pub fn condition2(&self, n: usize) -> T {
        let nf = T::from_usize(n).unwrap();
        let e = -T::PI() * self.mu * nf * self.kappa(n) / (T::lit(2.0) * (self.big_m - self.mu));
        nf * e.exp()
    }
}

pub fn kappa<T: Real>(n: usize, mu: T, big_m: T) -> Result<T> {
    if n == 0 {
        return Err(Error::OutOfRange("n must be at least 1".into()));
    }
    Ok(KappaSequence::new(mu, big_m)?.kappa(n))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaReport {
    /// `(n, κ_n, condition-(2) term)` at powers of two and at `n_max`.
    pub table: Vec<(usize, f64, f64)>,
    /// First index from which `κ_n` is nonincreasing up to `n_max`.
    pub kappa_decreasing_from: usize,
    pub condition2_decreasing_from: usize,
    pub n_max: usize,
}

pub fn kappa_conditions_report<T: Real>(mu: T, big_m: T, n_max: usize) -> Result<KappaReport> {
    if n_max < 2 {
        return Err(Error::OutOfRange("n_max must be at least 2".into()));
    }
    let seq = KappaSequence::new(mu, big_m)?;
    let mut kappa_from = 1;
    let mut cond_from = 1;
    let mut prev = (seq.kappa(1), seq.condition2(1));
    let mut table = Vec::new();
    for n in 1..=n_max {
        let cur = (seq.kappa(n), seq.condition2(n));
        if n > 1 {
            if cur.0 > prev.0 {
                kappa_from = n;
            }
            if cur.1 > prev.1 {
                cond_from = n;
            }
        }
        if n.is_power_of_two() || n == n_max {
            table.push((n, cur.0.to_f64_lossy(), cur.1.to_f64_lossy()));
        }
        prev = cur;
    }
    Ok(KappaReport { table, kappa_decreasing_from: kappa_from, condition2_decreasing_from: cond_from, n_max })
}

/// `(8/π) exp(−π ∫ dx/θ(x))` for widths sampled uniformly on `[x0, b]`.
/// Composite Simpson, with a 3/8 panel at the end for an even sample count.
pub fn channel_bound_straight<T: Real>(widths: &[T], x0: T, b: T) -> Result<Bound<T>> {
    if widths.iter().any(|w| !(*w > T::zero())) {
        return Err(Error::OutOfRange("channel width must be positive".into()));
    }
    if !(b >= x0) {
        return Err(Error::OutOfRange("need x0 <= b".into()));
    }
    let f: Vec<T> = widths.iter().map(|w| w.recip()).collect();
    let integral = if b == x0 {
        T::zero()
    } else {
        if f.len() < 2 {
            return Err(Error::OutOfRange("need at least two samples".into()));
        }
        let h = (b - x0) / T::from_usize(f.len() - 1).unwrap();
        simpson(&f, h)
    };
    Ok(Bound::upper(T::lit(8.0) / T::PI() * (-T::PI() * integral).exp()))
}

fn simpson<T: Real>(f: &[T], h: T) -> T {
    let n = f.len();
    if n == 2 {
        return h * (f[0] + f[1]) * T::lit(0.5);
    }
    let simple = |f: &[T]| {
        let mut s = f[0] + f[f.len() - 1];
        for (i, v) in f.iter().enumerate().take(f.len() - 1).skip(1) {
            s = s + *v * if i % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
        }
        s * h / T::lit(3.0)
    };
    if n % 2 == 1 {
        return simple(f);
    }
    let tail = &f[n - 4..];
    let three_eighths = T::lit(3.0) * h / T::lit(8.0) * (tail[0] + T::lit(3.0) * (tail[1] + tail[2]) + tail[3]);
    if n == 4 {
        three_eighths
    } else {
        simple(&f[..n - 3]) + three_eighths
    }
}

/// `(16/π) exp(−π r0 (θ0 − b) / (2 (r1 − r0)))`.
pub fn channel_bound_curved<T: Real>(r0: T, r1: T, b: T, theta0: T) -> Result<Bound<T>> {
    if !(T::zero() < r0 && r0 < r1) || !(T::zero() <= b && b <= theta0) {
        return Err(Error::OutOfRange("need 0 < r0 < r1 and 0 <= b <= theta0".into()));
    }
    let e = -T::PI() * r0 * (theta0 - b) / (T::lit(2.0) * (r1 - r0));
    Ok(Bound::upper(T::lit(16.0) / T::PI() * e.exp()))
}

/// `(2/π) √((r_{k+1} − r_k)/r_k)` for a gate on the positive real axis.
pub fn gate_axis_bound<T: Real>(r_k: T, r_k1: T) -> Result<Bound<T>> {
    if !(T::zero() < r_k && r_k <= r_k1) {
        return Err(Error::OutOfRange("need 0 < r_k <= r_k+1".into()));
    }
    Ok(Bound::upper(T::lit(2.0) / T::PI() * ((r_k1 - r_k) / r_k).sqrt()))
}

/// Upper bound on `sup_r |h_X(r) − h_Ω(r)|`, the harmonic measure of all gates.
pub fn hdiff_bound<T: Real>(d: &BlockedCircleDomain<T>) -> Bound<T> {
    let r = d.base().radii();
    let chi = d.insets();
    let mut total = T::zero();
    for (k, &phi) in d.gate_angles().iter().enumerate() {
        let gap = r[k + 1] - r[k];
        total = total
            + if phi > T::zero() {
                T::lit(32.0) / T::PI() * (-T::PI() * r[k] * chi[k] / (T::lit(2.0) * gap)).exp()
            } else {
                T::lit(2.0) / T::PI() * (gap / r[k]).sqrt()
            };
    }
    Bound::upper(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "status")]
pub enum ArcBound<T> {
    /// Lower bound on `ψ_k`; vacuous when not positive.
    Applicable { value: T, vacuous: bool },
    /// `r_k < M (1 − 1/e)`, outside the hypothesis.
    Inapplicable,
}

/// `min(π/2, πβ − (2/π)((M − r)/r)(2 log(M/(M − r)) + π²))` for `r ≥ M(1 − 1/e)`.
pub fn arc_lower_bound<T: Real>(beta: T, r_k: T, big_m: T) -> Result<ArcBound<T>> {
    if !(r_k > T::zero()) || r_k > big_m {
        return Err(Error::OutOfRange("need 0 < r_k <= M".into()));
    }
    if r_k < big_m * (T::one() - T::E().recip()) {
        return Ok(ArcBound::Inapplicable);
    }
    let pi = T::PI();
    let half_pi = pi * T::lit(0.5);
    let value = if r_k == big_m {
        half_pi.min(pi * beta)
    } else {
        let t = (big_m - r_k) / r_k;
        let inner = T::lit(2.0) * (big_m / (big_m - r_k)).ln() + pi * pi;
        half_pi.min(pi * beta - T::lit(2.0) / pi * t * inner)
    };
    Ok(ArcBound::Applicable { value, vacuous: value <= T::zero() })
}

/// Constants `α, μ, M` of a candidate function, for the χ functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Chi<T> {
    pub alpha: T,
    pub mu: T,
    pub big_m: T,
}

impl<T: Real> Chi<T> {
    pub fn new(alpha: T, mu: T, big_m: T) -> Result<Self> {
        if !(alpha > T::zero() && alpha <= T::one()) {
            return Err(Error::OutOfRange("need alpha in (0, 1]".into()));
        }
        if !(mu > T::zero() && big_m > mu) {
            return Err(Error::OutOfRange("need 0 < mu < M".into()));
        }
        Ok(Chi { alpha, mu, big_m })
    }

    fn width(&self) -> T {
        self.big_m - self.mu
    }

    fn check(&self, delta: T) -> Result<()> {
        if !(delta > T::zero() && delta <= self.width()) {
            return Err(Error::OutOfRange("need 0 < delta <= M - mu".into()));
        }
        Ok(())
    }

    /// `(2/(πμ)) δ log((128/(πα)) (M − μ)/δ)`.
    pub fn chi1(&self, delta: T) -> Result<T> {
        self.check(delta)?;
        let c = T::lit(128.0) / (T::PI() * self.alpha);
        Ok(T::lit(2.0) / (T::PI() * self.mu) * delta * (c * self.width() / delta).ln())
    }

    /// `Σ_{q<p} χ₁(2^{−q} δ)`.
    pub fn chi_p(&self, delta: T, p: usize) -> Result<T> {
        self.check(delta)?;
        let mut sum = T::zero();
        let mut d = delta;
        for _ in 0..p {
            sum = sum + self.chi1(d)?;
            d = d * T::lit(0.5);
        }
        Ok(sum)
    }

    /// `(4/(πμ)) δ (log((M − μ)/(αδ)) + log(256/π))`.
    pub fn chi_inf(&self, delta: T) -> Result<T> {
        self.check(delta)?;
        let l = (self.width() / (self.alpha * delta)).ln() + (T::lit(256.0) / T::PI()).ln();
        Ok(T::lit(4.0) / (T::PI() * self.mu) * delta * l)
    }

    /// Largest `δ ≤ M − μ` with `χ_∞(δ) ≤ x`, by bisection.
    pub fn chi_inf_inverse(&self, x: T) -> Result<T> {
        if !(x > T::zero()) {
            return Err(Error::OutOfRange("need a positive angle".into()));
        }
        if self.chi_inf(self.width())? <= x {
            return Ok(self.width());
        }
        let (mut lo, mut hi) = (T::zero(), self.width());
        for _ in 0..200 {
            let mid = (lo + hi) * T::lit(0.5);
            if mid == lo || mid == hi {
                break;
            }
            if self.chi_inf(mid)? <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    /// Part (i): `M − r_k ≤ ((M − μ)/(απ)) (π − ψ_k)`.
    pub fn radial_bound(&self, psi_k: T) -> Result<T> {
        if !(psi_k >= T::zero() && psi_k <= T::PI()) {
            return Err(Error::OutOfRange("need psi in [0, pi]".into()));
        }
        Ok(self.width() / (self.alpha * T::PI()) * (T::PI() - psi_k))
    }

    /// Part (ii): `η_{j,k} ≤ χ_∞(r_k − r_j)`, zero in the limit `r_k = r_j`.
    pub fn eta_bound(&self, r_j: T, r_k: T) -> Result<T> {
        let d = (r_k - r_j).abs();
        if d == T::zero() {
            return Ok(T::zero());
        }
        self.chi_inf(d)
    }

    /// Both parts of the estimate for arcs `j`, `k`.
    pub fn deriv_bounds(&self, psi_k: T, r_j: T, r_k: T) -> Result<(T, T)> {
        Ok((self.radial_bound(psi_k)?, self.eta_bound(r_j, r_k)?))
    }
}
