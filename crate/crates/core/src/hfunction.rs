//! Candidate h-functions, their descriptors and step approximations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::exact::beurling_lower_bound;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Constant,
    Linear,
}

/// Piecewise constant / linear function of the radius.
///
/// `f = 0` before the first breakpoint, `f(b_i) = v_i`, and on
/// `[b_i, b_{i+1})` the function is either `v_i` or the linear interpolant
/// from `v_i` to `v_{i+1}`. After the last breakpoint it stays at the last
/// value. Construction only checks the representation; whether the data is
/// an admissible candidate is reported by [`CandidateH::necessary_checks`].
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateH<T> {
    breakpoints: Vec<T>,
    values: Vec<T>,
    kinds: Vec<SegmentKind>,
}

/// Outcome of [`CandidateH::necessary_checks`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NecessaryReport {
    /// Always true for this representation; kept so reports are explicit.
    pub right_continuous: bool,
    /// First radius where the function decreases.
    pub monotone_violation: Option<f64>,
    /// Values outside `[0, 1]`, a final value other than 1, or `μ ≥ M`.
    pub range_violation: Option<String>,
    /// First grid radius where `f(r) < 1 − (4/π) arctan √(μ/r)`.
    pub beurling_violation: Option<f64>,
}

impl NecessaryReport {
    pub fn passed(&self) -> bool {
        self.right_continuous
            && self.monotone_violation.is_none()
            && self.range_violation.is_none()
            && self.beurling_violation.is_none()
    }
}

pub const BEURLING_GRID: usize = 1024;

impl<T: Real> CandidateH<T> {
    pub fn new(breakpoints: Vec<T>, values: Vec<T>, kinds: Vec<SegmentKind>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::InvalidFunction("no breakpoints".into()));
        }
        if values.len() != breakpoints.len() {
            return Err(Error::InvalidFunction("values and breakpoints differ in length".into()));
        }
        if kinds.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidFunction("need one segment kind per interval".into()));
        }
        if breakpoints.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::InvalidFunction("non-finite entry".into()));
        }
        if breakpoints[0] <= T::zero() {
            return Err(Error::InvalidFunction("breakpoints must be positive".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidFunction("breakpoints not strictly increasing".into()));
        }
        Ok(CandidateH { breakpoints, values, kinds })
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn kinds(&self) -> &[SegmentKind] {
        &self.kinds
    }

    pub fn evaluate(&self, r: T) -> Result<T> {
        if !(r > T::zero()) {
            return Err(Error::OutOfRange("radius must be positive".into()));
        }
        Ok(self.eval(r))
    }

    fn eval(&self, r: T) -> T {
        let b = &self.breakpoints;
        if r < b[0] {
            return T::zero();
        }
        let i = b.partition_point(|&x| x <= r) - 1;
        if i + 1 == b.len() {
            return self.values[i];
        }
        match self.kinds[i] {
            SegmentKind::Constant => self.values[i],
            SegmentKind::Linear => {
                let t = (r - b[i]) / (b[i + 1] - b[i]);
                self.values[i] + (self.values[i + 1] - self.values[i]) * t
            }
        }
    }

    /// Value just before the end of segment `i`.
    fn end_value(&self, i: usize) -> T {
        match self.kinds[i] {
            SegmentKind::Constant => self.values[i],
            SegmentKind::Linear => self.values[i + 1],
        }
    }

    fn first_decrease(&self) -> Option<T> {
        if self.values[0] < T::zero() {
            return Some(self.breakpoints[0]);
        }
        for i in 0..self.kinds.len() {
            if self.end_value(i) < self.values[i] {
                return Some(self.breakpoints[i]);
            }
            if self.values[i + 1] < self.end_value(i) {
                return Some(self.breakpoints[i + 1]);
            }
        }
        None
    }

    fn range_problem(&self) -> Option<String> {
        if self.values.iter().any(|&v| v < T::zero() || v > T::one()) {
            return Some("values outside [0, 1]".into());
        }
        if *self.values.last().unwrap() != T::one() {
            return Some("function does not reach 1".into());
        }
        if self.values.iter().all(|&v| v == T::one()) && self.breakpoints.len() == 1 {
            return Some("support is a single point (mu = M)".into());
        }
        None
    }

    fn require_candidate(&self) -> Result<()> {
        if let Some(r) = self.first_decrease() {
            return Err(Error::InvalidFunction(format!("decreasing near r = {}", r)));
        }
        if let Some(msg) = self.range_problem() {
            return Err(Error::InvalidFunction(msg));
        }
        Ok(())
    }

    /// `μ = inf{r : f(r) > 0}` and `M = inf{r : f(r) = 1}`.
    pub fn support(&self) -> Result<(T, T)> {
        self.require_candidate()?;
        let b = &self.breakpoints;
        let v = &self.values;
        let mut mu = None;
        let mut big_m = None;
        for i in 0..b.len() {
            if mu.is_none() && v[i] > T::zero() {
                mu = Some(b[i]);
            }
            if big_m.is_none() && v[i] == T::one() {
                big_m = Some(b[i]);
            }
            if i + 1 < b.len() && self.kinds[i] == SegmentKind::Linear && mu.is_none() && v[i + 1] > T::zero() {
                mu = Some(b[i]);
            }
        }
        let (mu, big_m) = (mu.unwrap(), big_m.unwrap());
        if !(mu < big_m) {
            return Err(Error::InvalidFunction("support is a single point (mu = M)".into()));
        }
        Ok((mu, big_m))
    }

    pub fn mu(&self) -> Result<T> {
        Ok(self.support()?.0)
    }

    pub fn big_m(&self) -> Result<T> {
        Ok(self.support()?.1)
    }

    /// Segments of positive length inside `[μ, M]` as `(start, end, slope)`.
    fn segments_in_support(&self) -> Result<Vec<(T, T, T)>> {
        let (mu, big_m) = self.support()?;
        let b = &self.breakpoints;
        let mut out = Vec::new();
        for i in 0..self.kinds.len() {
            let lo = b[i].max(mu);
            let hi = b[i + 1].min(big_m);
            if lo < hi {
                let slope = match self.kinds[i] {
                    SegmentKind::Constant => T::zero(),
                    SegmentKind::Linear => (self.values[i + 1] - self.values[i]) / (b[i + 1] - b[i]),
                };
                out.push((lo, hi, slope));
            }
        }
        Ok(out)
    }

    /// `α = (M − μ) · inf` of secant slopes over `[μ, M]`. Upward jumps only
    /// raise secants, so the infimum is the smallest segment slope.
    pub fn minimal_secant_slope(&self) -> Result<T> {
        let (mu, big_m) = self.support()?;
        let min_slope = self
            .segments_in_support()?
            .iter()
            .map(|s| s.2)
            .fold(T::infinity(), |a, b| a.min(b));
        if min_slope.is_infinite() {
            return Ok(T::zero());
        }
        Ok((big_m - mu) * min_slope)
    }

    /// `β = f(μ)`.
    pub fn jump_at_mu(&self) -> Result<T> {
        let mu = self.mu()?;
        Ok(self.eval(mu))
    }

    /// Radii where `f` jumps, including `μ` when `β > 0`.
    pub fn jump_radii(&self) -> Vec<T> {
        let mut out = Vec::new();
        if self.values[0] != T::zero() {
            out.push(self.breakpoints[0]);
        }
        for i in 0..self.kinds.len() {
            if self.values[i + 1] != self.end_value(i) {
                out.push(self.breakpoints[i + 1]);
            }
        }
        out
    }

    pub fn is_continuous_at(&self, r: T) -> bool {
        !self.jump_radii().contains(&r)
    }

    /// Grid `r_{n,k} = μ + (M − μ) k / n` with `f` sampled on it.
    pub fn grid(&self, n: usize) -> Result<(Vec<T>, Vec<T>)> {
        if n == 0 {
            return Err(Error::OutOfRange("n must be at least 1".into()));
        }
        let (mu, big_m) = self.support()?;
        let nn = T::from_usize(n).unwrap();
        let mut radii: Vec<T> =
            (0..=n).map(|k| mu + (big_m - mu) * T::from_usize(k).unwrap() / nn).collect();
        radii[n] = big_m;
        let values = radii.iter().map(|&r| self.eval(r)).collect();
        Ok((radii, values))
    }

    /// The step function `f_n` jumping at the grid radii to `f(r_{n,k})`.
    pub fn step_approximation(&self, n: usize) -> Result<StepH<T>> {
        let (radii, values) = self.grid(n)?;
        let mut r_out = Vec::new();
        let mut v_out = Vec::new();
        let mut last = T::zero();
        for (r, v) in radii.into_iter().zip(values) {
            if v > last {
                r_out.push(r);
                v_out.push(v);
                last = v;
            }
        }
        StepH::new(r_out, v_out)
    }

    /// Right-continuity, monotonicity, range and the Beurling bound on a
    /// log-spaced grid of `(μ, M]`.
    pub fn necessary_checks(&self) -> NecessaryReport {
        let monotone_violation = self.first_decrease().map(|r| r.to_f64_lossy());
        let range_violation = self.range_problem();
        let mut report = NecessaryReport {
            right_continuous: true,
            monotone_violation,
            range_violation,
            beurling_violation: None,
        };
        if let Ok((mu, big_m)) = self.support() {
            let ratio = big_m / mu;
            let steps = T::from_usize(BEURLING_GRID).unwrap();
            for i in 1..=BEURLING_GRID {
                let r = if i == BEURLING_GRID {
                    big_m
                } else {
                    mu * ratio.powf(T::from_usize(i).unwrap() / steps)
                };
                let bound = beurling_lower_bound(mu, r).unwrap_or(T::zero());
                if self.eval(r) < bound {
                    report.beurling_violation = Some(r.to_f64_lossy());
                    break;
                }
            }
        } else if report.range_violation.is_none() && report.monotone_violation.is_none() {
            report.range_violation = Some("support is a single point (mu = M)".into());
        }
        report
    }

    /// True when no segment of positive length inside `[μ, M]` is flat.
    pub fn is_strictly_increasing(&self) -> Result<bool> {
        Ok(self.segments_in_support()?.iter().all(|s| s.2 > T::zero()))
    }

    /// Continuous extension of `f⁻¹`: `inf{r ≥ μ : f(r) ≥ y}`.
    pub fn inverse(&self, y: T) -> Result<T> {
        if !self.is_strictly_increasing()? {
            return Err(Error::NotStrictlyIncreasing);
        }
        if !(y >= T::zero() && y <= T::one()) {
            return Err(Error::OutOfRange("y must lie in [0, 1]".into()));
        }
        let (mu, big_m) = self.support()?;
        if self.eval(mu) >= y {
            return Ok(mu);
        }
        for (lo, hi, slope) in self.segments_in_support()? {
            let start = self.eval(lo);
            if start >= y {
                return Ok(lo);
            }
            let end = start + slope * (hi - lo);
            if end >= y {
                return Ok((lo + (y - start) / slope).min(hi));
            }
        }
        Ok(big_m)
    }
}

/// Step function with jumps at `r_0 < … < r_n` to cumulative values
/// `v_0 < … < v_n = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepH<T> {
    radii: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> StepH<T> {
    pub fn new(radii: Vec<T>, values: Vec<T>) -> Result<Self> {
        if radii.is_empty() || radii.len() != values.len() {
            return Err(Error::InvalidFunction("need matching non-empty radii and values".into()));
        }
        if radii.iter().chain(&values).any(|x| !x.is_finite()) || radii[0] <= T::zero() {
            return Err(Error::InvalidFunction("radii must be finite and positive".into()));
        }
        if radii.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidFunction("radii not strictly increasing".into()));
        }
        if values[0] <= T::zero() || values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidFunction("values not strictly increasing from 0".into()));
        }
        if *values.last().unwrap() != T::one() {
            return Err(Error::InvalidFunction("last value must be 1".into()));
        }
        Ok(StepH { radii, values })
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Jump heights `v_k − v_{k−1}`.
    pub fn heights(&self) -> Vec<T> {
        let mut prev = T::zero();
        self.values
            .iter()
            .map(|&v| {
                let h = v - prev;
                prev = v;
                h
            })
            .collect()
    }

    pub fn evaluate(&self, r: T) -> T {
        let i = self.radii.partition_point(|&x| x <= r);
        if i == 0 {
            T::zero()
        } else {
            self.values[i - 1]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn example() -> CandidateH<f64> {
        CandidateH::new(vec![1.0, 1.0992], vec![0.5, 1.0], vec![SegmentKind::Linear]).unwrap()
    }

    #[test]
    fn evaluates_example_ramp() {
        let f = example();
        assert_eq!(f.evaluate(1.0).unwrap(), 0.5);
        assert!((f.evaluate(1.0496).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(f.evaluate(0.5).unwrap(), 0.0);
        assert_eq!(f.evaluate(2.0).unwrap(), 1.0);
        assert!(f.evaluate(0.0).is_err());
    }

    #[test]
    fn descriptors_of_example() {
        let f = example();
        assert_eq!(f.support().unwrap(), (1.0, 1.0992));
        assert!((f.minimal_secant_slope().unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(f.jump_at_mu().unwrap(), 0.5);
        assert_eq!(f.jump_radii(), vec![1.0]);
    }

    #[test]
    fn secant_slope_edge_cases() {
        let lin = CandidateH::new(vec![1.0f64, 2.0], vec![0.0, 1.0], vec![SegmentKind::Linear]).unwrap();
        assert!((lin.minimal_secant_slope().unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(lin.jump_at_mu().unwrap(), 0.0);
        let flat = CandidateH::new(
            vec![1.0, 1.5, 2.0, 3.0],
            vec![0.0, 0.4, 0.4, 1.0],
            vec![SegmentKind::Linear, SegmentKind::Constant, SegmentKind::Linear],
        )
        .unwrap();
        assert_eq!(flat.minimal_secant_slope().unwrap(), 0.0);
        assert_eq!(flat.inverse(0.5), Err(Error::NotStrictlyIncreasing));
        let step = CandidateH::new(vec![1.0, 2.0], vec![1.0, 1.0], vec![SegmentKind::Constant]);
        assert!(step.unwrap().support().is_err());
        let jump = CandidateH::new(vec![1.0, 2.0], vec![0.3, 1.0], vec![SegmentKind::Constant]).unwrap();
        assert_eq!(jump.jump_at_mu().unwrap(), 0.3);
        assert_eq!(jump.minimal_secant_slope().unwrap(), 0.0);
    }

    #[test]
    fn step_approximation_of_example() {
        let s = example().step_approximation(2).unwrap();
        assert_eq!(s.radii().len(), 3);
        assert!((s.radii()[1] - 1.0496).abs() < 1e-15);
        assert_eq!(s.radii()[2], 1.0992);
        assert_eq!(s.values()[0], 0.5);
        assert!((s.values()[1] - 0.75).abs() < 1e-12);
        assert_eq!(s.values()[2], 1.0);
        let one = example().step_approximation(1).unwrap();
        assert_eq!(one.radii(), &[1.0, 1.0992]);
        assert_eq!(one.values(), &[0.5, 1.0]);
        assert!(example().step_approximation(0).is_err());
    }

    #[test]
    fn step_with_jumps_on_grid_is_reproduced() {
        let f = CandidateH::new(
            vec![1.0, 1.5, 2.0],
            vec![0.25, 0.5, 1.0],
            vec![SegmentKind::Constant, SegmentKind::Constant],
        )
        .unwrap();
        let s = f.step_approximation(2).unwrap();
        assert_eq!(s.radii(), &[1.0, 1.5, 2.0]);
        assert_eq!(s.values(), &[0.25, 0.5, 1.0]);
        for i in 0..300 {
            let r = 0.5 + i as f64 * 0.01;
            assert_eq!(s.evaluate(r), f.evaluate(r).unwrap());
        }
    }

    #[test]
    fn beta_zero_drops_first_jump() {
        let lin = CandidateH::new(vec![1.0, 2.0], vec![0.0, 1.0], vec![SegmentKind::Linear]).unwrap();
        let s = lin.step_approximation(4).unwrap();
        assert_eq!(s.radii().len(), 4);
        assert_eq!(s.radii()[0], 1.25);
    }

    #[test]
    fn necessary_checks_and_beurling() {
        assert!(example().necessary_checks().passed());
        // a function hugging the Beurling curve from below on (1, 4]
        let mut b = vec![1.0];
        let mut v = vec![0.0];
        for i in 1..=40 {
            let r = 1.0 + 3.0 * i as f64 / 40.0;
            b.push(r);
            v.push((beurling_lower_bound(1.0, r).unwrap() - 0.01).max(0.0));
        }
        *v.last_mut().unwrap() = 1.0;
        let kinds = vec![SegmentKind::Linear; b.len() - 1];
        let f = CandidateH::new(b, v, kinds).unwrap();
        let rep = f.necessary_checks();
        assert!(rep.monotone_violation.is_none());
        assert!(rep.beurling_violation.is_some());
        assert!(!rep.passed());
        let bad = CandidateH::new(vec![1.0, 2.0, 3.0], vec![0.6, 0.4, 1.0], vec![SegmentKind::Constant; 2])
            .unwrap();
        assert_eq!(bad.necessary_checks().monotone_violation, Some(2.0));
    }

    #[test]
    fn inverse_of_example() {
        let f = example();
        assert!((f.inverse(0.75).unwrap() - 1.0496).abs() < 1e-12);
        assert_eq!(f.inverse(0.3).unwrap(), 1.0);
        assert_eq!(f.inverse(0.0).unwrap(), 1.0);
        assert_eq!(f.inverse(1.0).unwrap(), 1.0992);
    }

    #[test]
    fn single_precision_evaluation() {
        let f = CandidateH::<f32>::new(vec![1.0, 2.0], vec![0.5, 1.0], vec![SegmentKind::Linear]).unwrap();
        assert_eq!(f.evaluate(1.5).unwrap(), 0.75);
        assert_eq!(f.minimal_secant_slope().unwrap(), 0.5);
    }

    fn candidate_strategy() -> impl Strategy<Value = CandidateH<f64>> {
        (2usize..8).prop_flat_map(|m| {
            (
                0.2f64..2.0,
                prop::collection::vec(0.01f64..1.0, m - 1),
                prop::collection::vec(0.0f64..1.0, m - 1),
                prop::collection::vec(prop::bool::ANY, m - 1),
            )
                .prop_map(|(start, gaps, incs, lin)| {
                    let mut b = vec![start];
                    for g in gaps {
                        b.push(b.last().unwrap() + g);
                    }
                    let total = 1.0 + incs.iter().sum::<f64>();
                    let mut v = vec![0.5 / total];
                    for x in &incs {
                        v.push(v.last().unwrap() + x / total);
                    }
                    let mut v: Vec<f64> = v.into_iter().map(|x| x.min(1.0)).collect();
                    *v.last_mut().unwrap() = 1.0;
                    let kinds =
                        lin.iter().map(|&l| if l { SegmentKind::Linear } else { SegmentKind::Constant }).collect();
                    CandidateH::new(b, v, kinds).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn evaluate_is_monotone_and_right_continuous(f in candidate_strategy()) {
            let (mu, big_m) = f.support().unwrap();
            let mut prev = 0.0;
            for i in 0..=400 {
                let r = mu * 0.9 + (big_m * 1.1 - mu * 0.9) * i as f64 / 400.0;
                let v = f.evaluate(r).unwrap();
                prop_assert!(v >= prev);
                prev = v;
            }
            for &b in f.breakpoints() {
                let right = f.evaluate(b * (1.0 + 1e-12)).unwrap();
                prop_assert!((right - f.evaluate(b).unwrap()).abs() < 1e-9);
            }
        }

        #[test]
        fn step_approximation_stays_below(f in candidate_strategy(), n in 1usize..20) {
            let s = f.step_approximation(n).unwrap();
            let (radii, values) = f.grid(n).unwrap();
            for (r, v) in radii.iter().zip(&values) {
                prop_assert_eq!(s.evaluate(*r), *v);
            }
            let (mu, big_m) = f.support().unwrap();
            for i in 0..=300 {
                let r = mu * 0.9 + (big_m * 1.1 - mu * 0.9) * i as f64 / 300.0;
                prop_assert!(s.evaluate(r) <= f.evaluate(r).unwrap() + 1e-15);
            }
        }

        #[test]
        fn grid_secants_dominate_alpha(f in candidate_strategy(), n in 1usize..12) {
            let alpha = f.minimal_secant_slope().unwrap();
            let (mu, big_m) = f.support().unwrap();
            let (radii, values) = f.grid(n).unwrap();
            for j in 0..radii.len() {
                for k in j + 1..radii.len() {
                    let sec = (big_m - mu) * (values[k] - values[j]) / (radii[k] - radii[j]);
                    prop_assert!(sec >= alpha - 1e-9);
                }
            }
        }

        #[test]
        fn inverse_undoes_evaluate(g in candidate_strategy(), t in 0.0f64..1.0) {
            let kinds = vec![SegmentKind::Linear; g.kinds().len()];
            let f = CandidateH::new(g.breakpoints().to_vec(), g.values().to_vec(), kinds).unwrap();
            prop_assume!(f.is_strictly_increasing().unwrap());
            let (mu, big_m) = f.support().unwrap();
            let r = mu + (big_m - mu) * t;
            prop_assume!(f.is_continuous_at(r) && r > mu);
            let back = f.inverse(f.evaluate(r).unwrap()).unwrap();
            prop_assert!((back - r).abs() < 1e-9 * big_m);
        }
    }
}
