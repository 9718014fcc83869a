//! The full construction: step approximations, solved circle domains,
//! gates, measured gaps and the verdicts of the sufficient conditions.

use rayon::prelude::*;
use serde::Serialize;

use super::ulc::{ulc_diagnostics, UlcReport};
use super::{build_blocked, solve_circle_domain, stream_seed, Engine, Meter, SolveOptions};
use crate::bounds::{hdiff_bound, kappa_conditions_report, thresholds, Bound, Chi, KappaReport, KappaSequence, Thresholds};
use crate::error::{Error, Result};
use crate::geometry::BlockedCircleDomain;
use crate::hfunction::{CandidateH, NecessaryReport};
use crate::potential::{beurling_lower_bound, MeasureEstimate, WosConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Engine for solving `X_n`.
    pub inversion: Engine,
    pub solve: SolveOptions,
    /// Engine for measuring `h_{X_n}` and `h_{Ω_n}`; walk seeds are derived
    /// from `seed` and `n`.
    pub measure: Engine,
    pub seed: u64,
    pub eps_grid: Vec<f64>,
    /// Last index tabulated for the κ conditions.
    pub kappa_n_max: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            inversion: Engine::default(),
            solve: SolveOptions::default(),
            measure: Engine::Wos(WosConfig { samples: 200_000, ..WosConfig::default() }),
            seed: 0,
            eps_grid: vec![0.5, 0.2, 0.1, 0.05, 0.02, 0.01],
            kappa_n_max: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictStatus {
    Pass,
    Fail,
    HypothesisViolated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub detail: String,
}

impl Verdict {
    fn pass(detail: impl Into<String>) -> Self {
        Verdict { status: VerdictStatus::Pass, detail: detail.into() }
    }
    fn fail(detail: impl Into<String>) -> Self {
        Verdict { status: VerdictStatus::Fail, detail: detail.into() }
    }
    fn hypothesis(detail: impl Into<String>) -> Self {
        Verdict { status: VerdictStatus::HypothesisViolated, detail: detail.into() }
    }
    pub fn passed(&self) -> bool {
        self.status == VerdictStatus::Pass
    }
}

/// Descriptors of a candidate and the threshold test on `(M − μ)/μ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub mu: f64,
    pub big_m: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `(M − μ)/μ`.
    pub ratio: f64,
    pub necessary: NecessaryReport,
    pub strictly_increasing: bool,
    pub thresholds: Option<Thresholds<f64>>,
    /// `min(m1, m2, m3) − (M − μ)/μ`.
    pub margin: Option<f64>,
    pub fjump: Verdict,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.necessary.passed() && self.fjump.passed()
    }
}

/// Runs the necessary conditions and the threshold test. No harmonic
/// measure is computed.
pub fn check_candidate(f: &CandidateH<f64>) -> Result<CheckReport> {
    let necessary = f.necessary_checks();
    let (mu, big_m) = match f.support() {
        Ok(s) => s,
        Err(e) => {
            let nan = f64::NAN;
            return Ok(CheckReport {
                mu: nan,
                big_m: nan,
                alpha: nan,
                beta: nan,
                ratio: nan,
                necessary,
                strictly_increasing: false,
                thresholds: None,
                margin: None,
                fjump: Verdict::fail(format!("not a candidate: {e}")),
            });
        }
    };
    let alpha = f.minimal_secant_slope()?;
    let beta = f.jump_at_mu()?;
    let strictly_increasing = f.is_strictly_increasing()?;
    let ratio = (big_m - mu) / mu;
    let mut th = None;
    let mut margin = None;
    let fjump = if !(alpha > 0.0) {
        Verdict::hypothesis("hypothesis alpha>0 violated")
    } else if !(beta > 0.0) {
        Verdict::hypothesis("hypothesis beta>0 violated")
    } else if !strictly_increasing {
        Verdict::hypothesis("hypothesis strictly increasing violated")
    } else {
        let t = thresholds(alpha, beta)?;
        let m = t.m0() - ratio;
        th = Some(t);
        margin = Some(m);
        if m > 0.0 {
            Verdict::pass(format!("(M-mu)/mu = {ratio} < m0 = {}", t.m0()))
        } else {
            Verdict::fail(format!("(M-mu)/mu = {ratio} >= m0 = {}", t.m0()))
        }
    };
    Ok(CheckReport { mu, big_m, alpha, beta, ratio, necessary, strictly_increasing, thresholds: th, margin, fjump })
}

/// Measured quantities of one `(X_n, Ω_n)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measured {
    pub radii: Vec<f64>,
    /// Whether `f` is continuous at each radius.
    pub continuity: Vec<bool>,
    pub f: Vec<f64>,
    pub h_x: Vec<MeasureEstimate>,
    pub h_omega: Vec<MeasureEstimate>,
    /// `sup_r |h_X − h_Ω|` and the standard error of the difference there.
    pub gate_gap: f64,
    pub gate_gap_se: f64,
    /// Whether `|h_X − h_Ω| ≤ hdiff_bound + 3 SE` at every radius.
    pub gate_gap_ok: bool,
    /// `sup |h_Ω − f|` over continuity points.
    pub f_gap: f64,
    pub f_gap_se: f64,
    /// `min_r (h_Ω(r) − (1 − (4/π) arctan √(μ/r)) + 3 SE)`.
    pub beurling_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NReport {
    pub n: usize,
    /// Jump radii and values of `f_n`.
    pub step_radii: Vec<f64>,
    pub step_values: Vec<f64>,
    pub psi: Vec<f64>,
    pub solve_residuals: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
    pub error: Option<String>,
    pub kappa: f64,
    /// Arcs other than the outer circle with `ψ ≤ κ_n`.
    pub sigma: usize,
    pub min_psi: f64,
    pub phi: Vec<f64>,
    pub chi: Vec<f64>,
    pub omega_valid: bool,
    pub hdiff_bound: Option<Bound<f64>>,
    pub measured: Option<Measured>,
    #[serde(skip)]
    pub omega: Option<BlockedCircleDomain<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conditions {
    pub kappa_to_zero: Verdict,
    pub kappa_not_too_fast: Verdict,
    pub alpha_positive: Verdict,
    pub few_short_arcs: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructionReport {
    pub check: CheckReport,
    pub kappa: KappaReport,
    pub conditions: Conditions,
    pub seed: u64,
    pub per_n: Vec<NReport>,
    pub ulc: Option<UlcReport>,
    /// `sup |h_{Ω_n} − f|` nonincreasing along the supplied `n` within 3 SE.
    pub convergence: Verdict,
}

fn sorted_union(mut r: Vec<f64>) -> Vec<f64> {
    r.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(r.len());
    for x in r {
        match out.last() {
            Some(&y) if (x - y).abs() <= 1e-12 * y.abs() => {}
            _ => out.push(x),
        }
    }
    out
}

fn run_n(f: &CandidateH<f64>, n: usize, at: &[f64], cfg: &PipelineConfig) -> Result<NReport> {
    let (mu, big_m) = f.support()?;
    let steps = f.step_approximation(n)?;
    let kappa = KappaSequence::new(mu, big_m)?.kappa(n);
    let mut rep = NReport {
        n,
        step_radii: steps.radii().to_vec(),
        step_values: steps.values().to_vec(),
        psi: Vec::new(),
        solve_residuals: Vec::new(),
        sweeps: 0,
        converged: false,
        error: None,
        kappa,
        sigma: 0,
        min_psi: f64::NAN,
        phi: Vec::new(),
        chi: Vec::new(),
        omega_valid: false,
        hdiff_bound: None,
        measured: None,
        omega: None,
    };
    let inversion = cfg.inversion.with_seed(stream_seed(cfg.seed, n, 0));
    let psi = match solve_circle_domain(&steps, &inversion, &cfg.solve) {
        Ok(s) => {
            rep.converged = true;
            rep.sweeps = s.sweeps;
            rep.solve_residuals = s.residuals;
            s.psi
        }
        Err(Error::NotConverged { sweeps, psi, residuals, residual }) => {
            rep.sweeps = sweeps;
            rep.solve_residuals = residuals;
            rep.error = Some(format!("no convergence after {sweeps} sweeps (sup residual {residual:e})"));
            psi
        }
        Err(e) => {
            rep.error = Some(e.to_string());
            return Ok(rep);
        }
    };
    rep.psi = psi.clone();
    let last = psi.len() - 1;
    rep.sigma = psi[..last].iter().filter(|&&p| p <= kappa).count();
    rep.min_psi = psi[..last].iter().copied().fold(f64::INFINITY, f64::min);
    let x = crate::geometry::CircleDomain::new(steps.radii().to_vec(), psi.clone())?;
    let omega = build_blocked(&x, kappa)?;
    let v = omega.validate();
    rep.omega_valid = v.is_valid() && v.symmetric && v.simply_connected == Some(true);
    rep.phi = omega.gate_angles().to_vec();
    rep.chi = omega.insets().to_vec();
    let bound = hdiff_bound(&omega);
    rep.hdiff_bound = Some(bound);

    let measure = cfg.measure.with_seed(stream_seed(cfg.seed, n, 1));
    let mut meter = Meter::new(steps.radii(), &measure)?;
    let h_x = meter.h(&psi, None, at)?;
    let h_omega = meter.h(&psi, Some(omega.gate_angles()), at)?;
    let continuity: Vec<bool> = at.iter().map(|&r| f.is_continuous_at(r)).collect();
    let fv: Vec<f64> = at.iter().map(|&r| f.evaluate(r)).collect::<Result<_>>()?;
    let (mut gate_gap, mut gate_gap_se, mut gate_gap_ok) = (0.0, 0.0, true);
    let (mut f_gap, mut f_gap_se) = (0.0, 0.0);
    let mut beurling_margin = f64::INFINITY;
    for i in 0..at.len() {
        let (a, b) = (h_x[i], h_omega[i]);
        let gap = (a.value - b.value).abs();
        let se = a.std_error.hypot(b.std_error);
        if gap > gate_gap {
            gate_gap = gap;
            gate_gap_se = se;
        }
        if gap > bound.value + 3.0 * se {
            gate_gap_ok = false;
        }
        if continuity[i] {
            let g = (b.value - fv[i]).abs();
            if g > f_gap {
                f_gap = g;
                f_gap_se = b.std_error;
            }
        }
        if at[i] >= mu {
            let m = b.value - beurling_lower_bound(mu, at[i])? + 3.0 * b.std_error;
            beurling_margin = beurling_margin.min(m);
        }
    }
    rep.measured = Some(Measured {
        radii: at.to_vec(),
        continuity,
        f: fv,
        h_x,
        h_omega,
        gate_gap,
        gate_gap_se,
        gate_gap_ok,
        f_gap,
        f_gap_se,
        beurling_margin,
    });
    rep.omega = Some(omega);
    Ok(rep)
}

/// Builds `f_n`, `X_n` and `Ω_n` for every `n` in `n_list`, measures them
/// and evaluates the sufficient conditions. Per-`n` failures are recorded
/// in the report rather than returned.
pub fn run_pipeline(f: &CandidateH<f64>, n_list: &[usize], cfg: &PipelineConfig) -> Result<ConstructionReport> {
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::OutOfRange("n list must be nonempty and positive".into()));
    }
    let check = check_candidate(f)?;
    let (mu, big_m) = (check.mu, check.big_m);
    let kappa = kappa_conditions_report(mu, big_m, cfg.kappa_n_max.max(2))?;
    let mut at = Vec::new();
    for &n in n_list {
        at.extend(f.grid(n)?.0);
    }
    let at = sorted_union(at);
    let per_n: Vec<NReport> =
        n_list.par_iter().map(|&n| run_n(f, n, &at, cfg)).collect::<Result<Vec<_>>>()?;

    let conditions = Conditions {
        kappa_to_zero: Verdict::pass(format!(
            "kappa_n nonincreasing for n >= {}, kappa_{} = {:e}",
            kappa.kappa_decreasing_from,
            kappa.n_max,
            kappa.table.last().unwrap().1
        )),
        kappa_not_too_fast: Verdict::pass(format!(
            "n exp(-pi mu n kappa_n / (2(M-mu))) nonincreasing for n >= {}, value at {} = {:e}",
            kappa.condition2_decreasing_from,
            kappa.n_max,
            kappa.table.last().unwrap().2
        )),
        alpha_positive: if check.alpha > 0.0 {
            Verdict::pass(format!("alpha = {}", check.alpha))
        } else {
            Verdict::fail("alpha = 0")
        },
        few_short_arcs: few_short_arcs(&per_n),
    };

    let ulc = if check.alpha > 0.0 {
        let c = Chi::new(check.alpha, mu, big_m)?;
        let doms: Vec<(usize, &BlockedCircleDomain<f64>)> =
            per_n.iter().filter_map(|r| r.omega.as_ref().map(|o| (r.n, o))).collect();
        Some(ulc_diagnostics(&doms, &c, &cfg.eps_grid)?)
    } else {
        None
    };
    let convergence = trend(&per_n);
    Ok(ConstructionReport { check, kappa, conditions, seed: cfg.seed, per_n, ulc, convergence })
}

fn few_short_arcs(per_n: &[NReport]) -> Verdict {
    if let Some(r) = per_n.iter().find(|r| r.psi.is_empty()) {
        return Verdict::fail(format!("X_{} was not solved", r.n));
    }
    let ratios: Vec<f64> = per_n.iter().map(|r| r.sigma as f64 / (r.n as f64).sqrt()).collect();
    let listed = per_n.iter().zip(&ratios).map(|(r, q)| format!("n={}: {q:.4}", r.n)).collect::<Vec<_>>().join(", ");
    if ratios.windows(2).all(|w| w[1] <= w[0]) {
        Verdict::pass(format!("sigma_n/sqrt(n) nonincreasing over the supplied n ({listed})"))
    } else {
        Verdict::fail(format!("sigma_n/sqrt(n) increases ({listed})"))
    }
}

fn trend(per_n: &[NReport]) -> Verdict {
    let gaps: Vec<(usize, f64, f64)> =
        per_n.iter().filter_map(|r| r.measured.as_ref().map(|m| (r.n, m.f_gap, m.f_gap_se))).collect();
    if gaps.len() < per_n.len() {
        return Verdict::fail("some n were not measured");
    }
    let listed = gaps.iter().map(|(n, g, _)| format!("n={n}: {g:.4}")).collect::<Vec<_>>().join(", ");
    let ok = gaps.windows(2).all(|w| w[1].1 <= w[0].1 + 3.0 * w[0].2.hypot(w[1].2));
    if ok {
        Verdict::pass(format!("sup |h_Omega_n - f| nonincreasing within 3 SE ({listed})"))
    } else {
        Verdict::fail(format!("sup |h_Omega_n - f| increases ({listed})"))
    }
}
