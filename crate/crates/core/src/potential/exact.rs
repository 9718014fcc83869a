//! Closed-form harmonic measures used as oracles.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `1 − (4/π) arctan √(μ/r)`, a lower bound for the h-function of any simply
/// connected domain whose boundary comes within `μ` of the origin.
///
/// Evaluated as `(4/π) arctan((1 − s)/(1 + s))` with `s = √(μ/r)`, which is
/// exactly zero at `r = μ`.
pub fn beurling_lower_bound<T: Real>(mu: T, r: T) -> Result<T> {
    if !(mu > T::zero()) || !(r >= mu) {
        return Err(Error::OutOfRange("need 0 < mu <= r".into()));
    }
    if r.is_infinite() {
        return Ok(T::one());
    }
    let s = (mu / r).sqrt();
    Ok(T::lit(4.0) / T::PI() * ((T::one() - s) / (T::one() + s)).atan())
}

/// h-function at `r` of the disk `B(a, R)`, seen from the origin.
///
/// The boundary points with modulus at most `r` form the arc
/// `{a + R e^{it} : cos t ≤ c}`, `c = (r² − |a|² − R²)/(2|a|R)`. Seen from
/// `−|a|/R` in the unit disk, the complementary arc `|t| < t₀` has harmonic
/// measure `(2/π) arctan(((R − |a|)/(R + |a|)) tan(t₀/2))`.
pub fn exact_offcenter_disk_h<T: Real>(center: Complex<T>, radius: T, r: T) -> Result<T> {
    let a = center.norm();
    if !(a < radius) {
        return Err(Error::OutOfRange("need |a| < R".into()));
    }
    if !(r >= T::zero()) {
        return Err(Error::OutOfRange("radius must be nonnegative".into()));
    }
    if a == T::zero() {
        return Ok(if r >= radius { T::one() } else { T::zero() });
    }
    if r >= a + radius {
        return Ok(T::one());
    }
    if r <= radius - a {
        return Ok(T::zero());
    }
    let c = (r * r - a * a - radius * radius) / (T::lit(2.0) * a * radius);
    let t0 = c.max(-T::one()).min(T::one()).acos();
    let q = (radius - a) / (radius + a);
    let far = T::lit(2.0) / T::PI() * (q * (t0 * T::lit(0.5)).tan()).atan();
    Ok((T::one() - far).max(T::zero()).min(T::one()))
}

/// Harmonic measure at 0 of the segment `[r_k, r_{k+1}]` in the slit disk
/// `B(0, M) ∖ [r_k, M]`.
pub fn exact_slit_disk_gate<T: Real>(r_k: T, r_k1: T, big_m: T) -> Result<T> {
    if !(T::zero() < r_k && r_k <= r_k1 && r_k1 <= big_m) {
        return Err(Error::OutOfRange("need 0 < r_k <= r_k+1 <= M".into()));
    }
    let num = (r_k1 - r_k) * (big_m * big_m - r_k1 * r_k);
    let den = r_k * (r_k1 + big_m) * (r_k1 + big_m);
    Ok(T::lit(2.0) / T::PI() * (num / den).sqrt().atan())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Poisson-kernel quadrature over the boundary circle of `B(a, R)`.
    fn poisson_disk_h(a: f64, radius: f64, r: f64, panels: usize) -> f64 {
        let q = -a / radius;
        let mut sum = 0.0;
        // Simpson in t on [0, π]; the integrand is even in t.
        let h = PI / panels as f64;
        for i in 0..=panels {
            let t = i as f64 * h;
            let w = Complex::new(a, 0.0) + Complex::from_polar(radius, t);
            let inside = if w.norm() <= r { 1.0 } else { 0.0 };
            let kernel = (1.0 - q * q) / (Complex::from_polar(1.0, t) - q).norm_sqr();
            let coef = if i == 0 || i == panels { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += coef * inside * kernel;
        }
        sum * h / 3.0 / PI
    }

    #[test]
    fn beurling_values() {
        assert_eq!(beurling_lower_bound(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(beurling_lower_bound(0.37f64, 0.37).unwrap(), 0.0);
        let v = beurling_lower_bound(1.0, 4.0).unwrap();
        assert!((v - (1.0 - 4.0 / PI * 0.5f64.atan())).abs() < 1e-15);
        assert!((v - 0.409_665_529_398_266_9).abs() < 1e-14);
        assert!(beurling_lower_bound(2.0, 1.0).is_err());
        let mut prev = 0.0;
        for i in 1..200 {
            let r = 1.0 + i as f64 * i as f64;
            let b = beurling_lower_bound(1.0, r).unwrap();
            assert!(b > prev && b < 1.0);
            prev = b;
        }
        assert_eq!(beurling_lower_bound(1.0, f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn centered_disk_is_a_step() {
        let c = Complex::new(0.0, 0.0);
        assert_eq!(exact_offcenter_disk_h(c, 2.0, 1.999).unwrap(), 0.0);
        assert_eq!(exact_offcenter_disk_h(c, 2.0, 2.0).unwrap(), 1.0);
        assert!(exact_offcenter_disk_h(Complex::new(1.0, 0.0), 1.0, 1.0).is_err());
    }

    #[test]
    fn offcenter_disk_matches_poisson_quadrature() {
        let c = Complex::new(0.5, 0.0);
        assert_eq!(exact_offcenter_disk_h(c, 1.0, 0.5).unwrap(), 0.0);
        for r in [0.6, 0.8, 1.0, 1.2, 1.4] {
            let exact = exact_offcenter_disk_h(c, 1.0, r).unwrap();
            let quad = poisson_disk_h(0.5, 1.0, r, 2_000_000);
            assert!((exact - quad).abs() < 1e-5, "r={r}: {exact} vs {quad}");
        }
        let rotated = exact_offcenter_disk_h(Complex::from_polar(0.5, 2.0), 1.0, 1.0).unwrap();
        assert!((rotated - exact_offcenter_disk_h(c, 1.0, 1.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn offcenter_regression_value() {
        // frozen after agreement of the closed form, Poisson quadrature and walk-on-spheres
        let v = exact_offcenter_disk_h(Complex::new(0.5, 0.0), 1.0, 1.0).unwrap();
        assert!((v - OFFCENTER_V_STAR).abs() < 1e-12, "{v}");
    }

    pub(crate) const OFFCENTER_V_STAR: f64 = 0.741_291_869_765_498_7;

    #[test]
    fn slit_gate_values() {
        assert_eq!(exact_slit_disk_gate(1.0, 1.0, 2.0).unwrap(), 0.0);
        let v = exact_slit_disk_gate(1.0, 1.5, 2.0).unwrap();
        assert!((v - SLIT_GATE_1_15_2).abs() < 1e-12, "{v}");
        let full = exact_slit_disk_gate(1.0, 2.0, 2.0).unwrap();
        let alt = 2.0 / PI * ((2.0f64 - 1.0) * (4.0 - 2.0) / (1.0 * 16.0)).sqrt().atan();
        assert!((full - alt).abs() < 1e-15);
        assert!(exact_slit_disk_gate(1.5, 1.0, 2.0).is_err());
        for i in 1..40 {
            for j in 0..40 {
                let rk = 0.1 + 0.05 * i as f64;
                let rk1 = rk * (1.0 + 0.03 * j as f64);
                let m = rk1 * 1.7;
                let g = exact_slit_disk_gate(rk, rk1, m).unwrap();
                assert!(g <= 2.0 / PI * ((rk1 - rk) / rk).sqrt() + 1e-15);
            }
        }
    }

    pub(crate) const SLIT_GATE_1_15_2: f64 = 0.196_838_581_596_31;
}
