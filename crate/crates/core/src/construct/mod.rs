//! From step functions to circle domains, and from candidate functions to
//! sequences of blocked circle domains.

mod pipeline;
mod ulc;

pub use pipeline::{
    check_candidate, run_pipeline, CheckReport, Conditions, ConstructionReport, Measured, NReport, PipelineConfig,
    Verdict, VerdictStatus,
};
pub use ulc::{delta1, delta2, ulc_diagnostics, UlcDomain, UlcReport, UlcRow, UlcViolation};

use num_complex::Complex;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{BlockedCircleDomain, CircleDomain};
use crate::hfunction::{CandidateH, StepH};
use crate::potential::{estimate_h, FdConfig, FdLayout, FdSolver, MeasureEstimate, Method, WosConfig};

/// Harmonic measure engine used by the constructions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Engine {
    Fd(FdConfig),
    Wos(WosConfig),
}

impl Default for Engine {
    fn default() -> Self {
        Engine::Fd(FdConfig::default())
    }
}

impl Engine {
    pub fn method(&self) -> Method {
        match self {
            Engine::Fd(_) => Method::Fd,
            Engine::Wos(_) => Method::Wos,
        }
    }

    fn with_seed(&self, seed: u64) -> Engine {
        match *self {
            Engine::Wos(c) => Engine::Wos(WosConfig { seed, ..c }),
            e => e,
        }
    }
}

/// Seed for stage `stage` of pipeline index `n`, independent of run order.
pub(crate) fn stream_seed(seed: u64, n: usize, stage: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((n as u64) << 4 | stage);
    rng.next_u64()
}

/// Measures `h` at fixed radii for varying arc and gate angles.
pub(crate) struct Meter {
    radii: Vec<f64>,
    engine: Engine,
    fd: Option<FdSolver>,
    pub(crate) evaluations: usize,
}

impl Meter {
    pub(crate) fn new(boundary_radii: &[f64], engine: &Engine) -> Result<Self> {
        let fd = match engine {
            Engine::Fd(cfg) => {
                let mut psi = vec![0.0; boundary_radii.len()];
                *psi.last_mut().unwrap() = std::f64::consts::PI;
                let layout = FdLayout::Circles { radii: boundary_radii.to_vec(), psi, phi: None };
                Some(FdSolver::new(&layout, cfg)?)
            }
            Engine::Wos(_) => None,
        };
        Ok(Meter { radii: boundary_radii.to_vec(), engine: *engine, fd, evaluations: 0 })
    }

    /// `h` of the domain at each radius of `at`.
    pub(crate) fn h(&mut self, psi: &[f64], phi: Option<&[f64]>, at: &[f64]) -> Result<Vec<MeasureEstimate>> {
        self.evaluations += 1;
        match (&self.engine, &self.fd) {
            (Engine::Fd(_), Some(solver)) => {
                let layout = FdLayout::Circles {
                    radii: self.radii.clone(),
                    psi: psi.to_vec(),
                    phi: phi.map(<[f64]>::to_vec),
                };
                Ok(solver.solve(&layout)?.h_table(at).estimates)
            }
            (Engine::Wos(cfg), _) => {
                let x = CircleDomain::new(self.radii.clone(), psi.to_vec())?;
                let t = match phi {
                    Some(p) => estimate_h(&BlockedCircleDomain::new(x, p.to_vec())?, at, cfg)?,
                    None => estimate_h(&x, at, cfg)?,
                };
                Ok(t.estimates)
            }
            _ => Err(Error::Engine("meter without a solver".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Sup-norm tolerance on `h_X(r_k) − v_k`.
    pub tol: f64,
    /// Angle resolution of each coordinate search.
    pub resolution: f64,
    pub max_sweeps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-3, resolution: 1e-4 * std::f64::consts::PI, max_sweeps: 50 }
    }
}

/// A solved circle domain with its measured residuals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solved {
    #[serde(skip)]
    pub domain: CircleDomain<f64>,
    pub radii: Vec<f64>,
    pub psi: Vec<f64>,
    /// `h_X(r_k) − v_k`.
    pub residuals: Vec<f64>,
    pub estimates: Vec<MeasureEstimate>,
    pub sweeps: usize,
    pub evaluations: usize,
}

impl Solved {
    pub fn sup_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Initial angles `ψ_k = π Δv_k`, clamped below `π`.
pub fn warm_start(steps: &StepH<f64>) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    let n = steps.radii().len();
    steps
        .heights()
        .iter()
        .enumerate()
        .map(|(k, h)| if k + 1 == n { pi } else { (pi * h).min(0.95 * pi) })
        .collect()
}

/// Finds the circle domain whose h-function has the given jumps.
///
/// Cyclic coordinate sweeps: arc `k` is widened or narrowed until
/// `h_X(r_k) = v_k` with the other arcs fixed, which is monotone in `ψ_k`.
pub fn solve_circle_domain(steps: &StepH<f64>, engine: &Engine, opts: &SolveOptions) -> Result<Solved> {
    solve_from(steps, engine, opts, &warm_start(steps))
}

/// As [`solve_circle_domain`], from the given initial angles.
pub fn solve_from(steps: &StepH<f64>, engine: &Engine, opts: &SolveOptions, start: &[f64]) -> Result<Solved> {
    let radii = steps.radii().to_vec();
    let targets = steps.values().to_vec();
    let n = radii.len();
    if n > 33 {
        return Err(Error::OutOfRange("at most 32 steps besides the outer circle".into()));
    }
    if start.len() != n {
        return Err(Error::OutOfRange(format!("expected {n} starting angles")));
    }
    if !(opts.tol > 0.0 && opts.resolution > 0.0) {
        return Err(Error::OutOfRange("tolerance and resolution must be positive".into()));
    }
    let pi = std::f64::consts::PI;
    let hi = pi - opts.resolution;
    let mut psi: Vec<f64> = start.iter().map(|p| p.clamp(0.0, hi)).collect();
    psi[n - 1] = pi;
    let mut meter = Meter::new(&radii, engine)?;
    let mut est = meter.h(&psi, None, &radii)?;
    // sweeps aim at tol/10 so that solves from different starts agree in ψ,
    // and only the final check uses tol itself
    let sup_excess = |e: &[MeasureEstimate], tol: f64| {
        (0..n)
            .map(|k| (e[k].value - targets[k]).abs() - tol - 3.0 * e[k].std_error)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut sweeps = 0;
    while sup_excess(&est, opts.tol / 10.0) > 0.0 {
        if sweeps == opts.max_sweeps {
            if sup_excess(&est, opts.tol) <= 0.0 {
                break;
            }
            let residuals: Vec<f64> = (0..n).map(|k| est[k].value - targets[k]).collect();
            return Err(Error::NotConverged {
                sweeps,
                residual: residuals.iter().fold(0.0, |m, r| m.max(r.abs())),
                psi,
                residuals,
            });
        }
        sweeps += 1;
        for k in 0..n - 1 {
            let ftol = opts.tol / 100.0 + 3.0 * est[k].std_error;
            let (x, e) = coordinate(&mut meter, &mut psi, k, targets[k], &radii, est, hi, ftol, opts.resolution)?;
            psi[k] = x;
            est = e;
        }
    }
    let residuals = (0..n).map(|k| est[k].value - targets[k]).collect();
    Ok(Solved {
        domain: CircleDomain::new(radii.clone(), psi.clone())?,
        radii,
        psi,
        residuals,
        estimates: est,
        sweeps,
        evaluations: meter.evaluations,
    })
}

/// Illinois iteration on `ψ_k ↦ h(r_k) − v_k`, increasing in `ψ_k`.
#[allow(clippy::too_many_arguments)]
fn coordinate(
    meter: &mut Meter,
    psi: &mut [f64],
    k: usize,
    target: f64,
    radii: &[f64],
    current: Vec<MeasureEstimate>,
    hi: f64,
    ftol: f64,
    res: f64,
) -> Result<(f64, Vec<MeasureEstimate>)> {
    let mut eval = |x: f64, psi: &mut [f64]| -> Result<(f64, Vec<MeasureEstimate>)> {
        psi[k] = x;
        let e = meter.h(psi, None, radii)?;
        Ok((e[k].value - target, e))
    };
    let x0 = psi[k];
    let f0 = current[k].value - target;
    let mut best = (f0.abs(), x0, current);
    if f0.abs() <= ftol {
        return Ok((x0, best.2));
    }
    let dir = if f0 > 0.0 { -1.0 } else { 1.0 };
    let (mut a, mut fa) = (x0, f0);
    let mut step = 0.05;
    let (mut b, mut fb);
    loop {
        b = (a + dir * step).clamp(0.0, hi);
        let (f, e) = eval(b, psi)?;
        fb = f;
        if fb.abs() < best.0 {
            best = (fb.abs(), b, e);
        }
        if fb.abs() <= ftol || fb.signum() != fa.signum() {
            break;
        }
        if b == 0.0 || b == hi {
            // target unreachable with the other arcs fixed
            psi[k] = best.1;
            return Ok((best.1, best.2));
        }
        a = b;
        fa = fb;
        step *= 2.0;
    }
    for _ in 0..60 {
        if best.0 <= ftol || (b - a).abs() <= res {
            break;
        }
        let mut x = b - fb * (b - a) / (fb - fa);
        let (lo, up) = (a.min(b), a.max(b));
        if !(x > lo && x < up) {
            x = 0.5 * (a + b);
        }
        let (fx, e) = eval(x, psi)?;
        if fx.abs() < best.0 {
            best = (fx.abs(), x, e);
        }
        if fx.signum() == fb.signum() {
            fa *= 0.5;
        } else {
            a = b;
            fa = fb;
        }
        b = x;
        fb = fx;
    }
    psi[k] = best.1;
    Ok((best.1, best.2))
}

/// Attaches gates with insets `χ_k = min(ψ_k, ψ_{k+1}, κ)`.
pub fn build_blocked(x: &CircleDomain<f64>, kappa: f64) -> Result<BlockedCircleDomain<f64>> {
    if !(kappa >= 0.0) {
        return Err(Error::OutOfRange("kappa must be nonnegative".into()));
    }
    let psi = x.psi();
    let chi: Vec<f64> = (0..x.n()).map(|k| psi[k].min(psi[k + 1]).min(kappa)).collect();
    BlockedCircleDomain::from_insets(x.clone(), &chi)
}

/// Samples `θ ↦ f⁻¹(|θ|/π)` at `n_theta` equally spaced angles in `[−π, π]`.
pub fn boundary_profile(f: &CandidateH<f64>, n_theta: usize) -> Result<Vec<(f64, f64)>> {
    if n_theta < 2 {
        return Err(Error::OutOfRange("need at least two angles".into()));
    }
    if !f.is_strictly_increasing()? {
        return Err(Error::NotStrictlyIncreasing);
    }
    let pi = std::f64::consts::PI;
    (0..n_theta)
        .map(|i| {
            let t = -pi + 2.0 * pi * i as f64 / (n_theta - 1) as f64;
            Ok((t, f.inverse((t.abs() / pi).min(1.0))?))
        })
        .collect()
}

/// Profile points as complex boundary points `ρ e^{iθ}`.
pub fn profile_points(profile: &[(f64, f64)]) -> Vec<Complex<f64>> {
    profile.iter().map(|&(t, r)| Complex::from_polar(r, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hfunction::SegmentKind;
    use std::f64::consts::PI;

    pub(crate) fn example() -> CandidateH<f64> {
        CandidateH::new(vec![1.0, 1.0992], vec![0.5, 1.0], vec![SegmentKind::Linear]).unwrap()
    }

    #[test]
    fn single_jump_is_a_disk() {
        let s = StepH::new(vec![2.0], vec![1.0]).unwrap();
        let x = solve_circle_domain(&s, &Engine::default(), &SolveOptions::default()).unwrap();
        assert_eq!(x.psi, vec![PI]);
        assert_eq!(x.sweeps, 0);
        assert_eq!(x.domain, CircleDomain::disk(2.0).unwrap());
    }

    #[test]
    fn two_jumps_converge() {
        let s = StepH::new(vec![1.0, 2.0], vec![0.5, 1.0]).unwrap();
        let x = solve_circle_domain(&s, &Engine::default(), &SolveOptions::default()).unwrap();
        assert!(x.sup_residual() <= 1e-3);
        assert!(x.psi[0] > 0.0 && x.psi[0] < PI);
        let again = solve_circle_domain(&s, &Engine::default(), &SolveOptions::default()).unwrap();
        assert_eq!(x.psi, again.psi);
    }

    #[test]
    fn reports_non_convergence() {
        let s = StepH::new(vec![1.0, 1.5, 2.0], vec![0.3, 0.6, 1.0]).unwrap();
        let opts = SolveOptions { max_sweeps: 0, ..SolveOptions::default() };
        match solve_circle_domain(&s, &Engine::default(), &opts) {
            Err(Error::NotConverged { sweeps, psi, residuals, .. }) => {
                assert_eq!(sweeps, 0);
                assert_eq!(psi.len(), 3);
                assert_eq!(residuals.len(), 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn blocked_insets() {
        let x = CircleDomain::new(vec![1.0, 1.2, 1.5, 2.0], vec![0.4, 0.9, 0.05, PI]).unwrap();
        let flush = build_blocked(&x, 0.0).unwrap();
        assert_eq!(flush.gate_angles(), &[0.4, 0.05, 0.05]);
        let axis = build_blocked(&x, 10.0).unwrap();
        assert!(axis.gate_angles().iter().all(|&p| p == 0.0));
        let k = 0.1;
        let d = build_blocked(&x, k).unwrap();
        for (p, c) in d.gate_angles().iter().zip(d.insets()) {
            if *p > 0.0 {
                assert_eq!(*c, k);
            }
        }
        assert_eq!(d.gate_angles()[1], 0.0);
        assert!(d.validate().is_valid());
        assert_eq!(d.validate().simply_connected, Some(true));
        assert!(build_blocked(&x, -1.0).is_err());
    }

    #[test]
    fn profile_endpoints() {
        let f = example();
        let p = boundary_profile(&f, 5).unwrap();
        assert_eq!(p[0], (-PI, 1.0992));
        assert_eq!(p[2], (0.0, 1.0));
        assert_eq!(p[4], (PI, 1.0992));
        assert_eq!(p[3].1, 1.0);
        let flat = CandidateH::new(
            vec![1.0, 1.5, 2.0],
            vec![0.5, 0.5, 1.0],
            vec![SegmentKind::Constant, SegmentKind::Linear],
        )
        .unwrap();
        assert_eq!(boundary_profile(&flat, 5), Err(Error::NotStrictlyIncreasing));
        assert_eq!(profile_points(&p)[2], Complex::new(1.0, 0.0));
    }

    #[test]
    fn stream_seeds_differ() {
        assert_ne!(stream_seed(1, 2, 0), stream_seed(1, 2, 1));
        assert_ne!(stream_seed(1, 2, 0), stream_seed(1, 4, 0));
        assert_eq!(stream_seed(5, 8, 1), stream_seed(5, 8, 1));
    }
}
