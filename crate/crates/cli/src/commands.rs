use std::fmt::Write;
use std::path::{Path, PathBuf};

use hmdf::construct::{
    boundary_profile, check_candidate, profile_points, run_pipeline, solve_circle_domain, CheckReport,
    ConstructionReport, PipelineConfig, SolveOptions,
};
use hmdf::geometry::CircleDomain;
use hmdf::hfunction::CandidateH;
use hmdf::potential::{beurling_lower_bound, estimate_h, fd_harmonic_measure, FdLayout};
use hmdf::{HFunctionTable, Target};

use crate::io::{
    csv_table, num, read_json, to_json, write_out, DomainFile, FunctionFile, LoadedDomain, StepFile,
};
use crate::svg::{curve_svg, domain_svg, plot_svg, Series, Style};
use crate::{CliError, CliResult, EngineKind, Output, RunConfig, EXIT_NOT_CONVERGED};

/// `a:b:n` for `n` equally spaced radii from `a` to `b`, or a comma list.
pub fn parse_radii(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::input(format!("bad radii spec {spec:?}"));
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let radii = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let (a, b) = (parse(parts[0])?, parse(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        match n {
            0 => return Err(bad()),
            1 => vec![a],
            _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
        }
    } else {
        spec.split(',').map(parse).collect::<CliResult<Vec<_>>>()?
    };
    if radii.is_empty() || radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(bad());
    }
    Ok(radii)
}

fn table(d: &LoadedDomain, radii: &[f64], cfg: &RunConfig) -> CliResult<HFunctionTable> {
    let engine = cfg.engine.unwrap_or(EngineKind::Wos);
    let t = match (engine, d) {
        (EngineKind::Wos, LoadedDomain::Circle(x)) => estimate_h(x, radii, &cfg.wos()),
        (EngineKind::Wos, LoadedDomain::Blocked(o)) => estimate_h(o, radii, &cfg.wos()),
        (EngineKind::Wos, LoadedDomain::Disk(b)) => estimate_h(b, radii, &cfg.wos()),
        (EngineKind::Fd, _) => {
            let layout = match d {
                LoadedDomain::Circle(x) => FdLayout::from(x),
                LoadedDomain::Blocked(o) => FdLayout::from(o),
                LoadedDomain::Disk(b) => FdLayout::from(b),
            };
            let targets: Vec<Target> = radii.iter().map(|&r| Target::ModulusAtMost(r)).collect();
            fd_harmonic_measure(&layout, &targets, &cfg.fd())
                .map(|estimates| HFunctionTable { radii: radii.to_vec(), estimates })
        }
    };
    t.map_err(|e| match e {
        hmdf::Error::InvalidDomain(_) | hmdf::Error::OutOfRange(_) => CliError::from(e),
        e => CliError::engine(e.to_string()),
    })
}

/// Tabulates `h` of the domain in `domain` at the radii of `radii`
/// (default: its boundary radii). Writes `h.csv`.
pub fn cmd_compute(domain: &Path, radii: Option<&str>, cfg: &RunConfig) -> CliResult<Output> {
    cfg.validate()?;
    let d = read_json::<DomainFile>(domain)?.into_domain()?;
    let radii = match radii {
        Some(s) => parse_radii(s)?,
        None => d.natural_radii(),
    };
    let t = table(&d, &radii, cfg)?;
    let rows: Vec<Vec<String>> = t
        .radii
        .iter()
        .zip(&t.estimates)
        .map(|(r, e)| vec![num(*r), num(e.value), num(e.std_error), e.method.as_str().to_string()])
        .collect();
    let csv = csv_table(&["r", "h", "std_error", "method"], &rows);
    let e = t.estimates.first();
    let note = format!(
        "{} radii, method {}, samples {}, discards {}",
        t.radii.len(),
        e.map_or("none", |e| e.method.as_str()),
        e.map_or(0, |e| e.samples),
        e.map_or(0, |e| e.discards)
    );
    emit(cfg, "h.csv", csv, vec![note])
}

/// Solves for the circle domain whose h-function has the jumps of the
/// step file. Writes `domain.json` with the residuals; a run that does not
/// converge still writes its last angles and exits with code 4.
pub fn cmd_invert(steps: &Path, cfg: &RunConfig) -> CliResult<Output> {
    cfg.validate()?;
    let s = read_json::<StepFile>(steps)?.into_steps()?;
    let engine = cfg.engine_or(EngineKind::Fd);
    let opts = SolveOptions { tol: cfg.tol, ..SolveOptions::default() };
    let method = engine.method().as_str().to_string();
    match solve_circle_domain(&s, &engine, &opts) {
        Ok(x) => {
            let file = DomainFile {
                residuals: Some(x.residuals.clone()),
                converged: Some(true),
                sweeps: Some(x.sweeps),
                method: Some(method),
                ..DomainFile::from_circle(&x.domain)
            };
            let note = format!("converged after {} sweeps, sup residual {:e}", x.sweeps, x.sup_residual());
            emit(cfg, "domain.json", to_json(&file), vec![note])
        }
        Err(hmdf::Error::NotConverged { sweeps, residual, psi, residuals }) => {
            let file = DomainFile {
                radii: Some(s.radii().to_vec()),
                psi: Some(psi),
                residuals: Some(residuals),
                converged: Some(false),
                sweeps: Some(sweeps),
                method: Some(method),
                ..DomainFile::default()
            };
            let out = emit(cfg, "domain.json", to_json(&file), Vec::new())?;
            Err(CliError {
                code: EXIT_NOT_CONVERGED,
                message: format!("no convergence after {sweeps} sweeps (sup residual {residual:e})"),
                output: Some(out.stdout),
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn check_table(c: &CheckReport) -> String {
    let mut s = String::new();
    let mut row = |k: &str, v: String| {
        let _ = writeln!(s, "{k:<16}{v}");
    };
    row("mu", format!("{}", c.mu));
    row("M", format!("{}", c.big_m));
    row("alpha", format!("{}", c.alpha));
    row("beta", format!("{}", c.beta));
    row("(M-mu)/mu", format!("{}", c.ratio));
    if let Some(t) = &c.thresholds {
        row("m1", format!("{}", t.m1));
        row("m2", format!("{}", t.m2));
        row("m3", format!("{}", t.m3));
        row("m0", format!("{}", t.m0()));
    }
    if let Some(m) = c.margin {
        row("margin", format!("{m:e}"));
    }
    let n = &c.necessary;
    let necessary = if n.passed() {
        "pass".to_string()
    } else if let Some(r) = n.monotone_violation {
        format!("fail: decreases at r = {r}")
    } else if let Some(why) = &n.range_violation {
        format!("fail: {why}")
    } else if let Some(r) = n.beurling_violation {
        format!("fail: below the Beurling bound at r = {r}")
    } else {
        "fail".to_string()
    };
    row("necessary", necessary);
    row("strictly incr.", format!("{}", c.strictly_increasing));
    row("sufficient", c.fjump.detail.clone());
    row("verdict", if c.passed() { "PASS" } else { "FAIL" }.to_string());
    s
}

/// Necessary conditions and the threshold test; no harmonic measure is
/// computed. Prints a table and writes `check.json`.
pub fn cmd_check(function: &Path, cfg: &RunConfig) -> CliResult<Output> {
    let f = read_json::<FunctionFile>(function)?.into_function()?;
    let c = check_candidate(&f)?;
    if let Some(dir) = &cfg.out {
        write_out(dir, "check.json", &to_json(&c))?;
    }
    Ok(Output { stdout: check_table(&c), notes: Vec::new() })
}

fn function_series(f: &CandidateH<f64>, range: (f64, f64)) -> Vec<(f64, f64)> {
    let mut xs: Vec<f64> = (0..=400).map(|i| range.0 + (range.1 - range.0) * i as f64 / 400.0).collect();
    for &b in f.breakpoints() {
        // left limit and value at each breakpoint draw the jumps vertically
        xs.push(b * (1.0 - 1e-12));
        xs.push(b);
    }
    xs.retain(|&x| x > 0.0 && x >= range.0 && x <= range.1);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.into_iter().map(|x| (x, f.evaluate(x).unwrap_or(0.0))).collect()
}

fn plot_range(f: &CandidateH<f64>) -> CliResult<(f64, f64)> {
    let (mu, big_m) = f.support()?;
    let w = big_m - mu;
    Ok(((mu - 0.5 * w).max(0.0), big_m + 0.5 * w))
}

fn beurling_series(mu: f64, range: (f64, f64)) -> Vec<(f64, f64)> {
    (0..=200)
        .map(|i| range.0.max(mu) + (range.1 - range.0.max(mu)) * i as f64 / 200.0)
        .map(|r| (r, beurling_lower_bound(mu, r).unwrap_or(0.0)))
        .collect()
}

fn function_plot(f: &CandidateH<f64>) -> CliResult<String> {
    let range = plot_range(f)?;
    let (mu, _) = f.support()?;
    Ok(plot_svg(
        range,
        &[
            Series { label: "f".into(), color: "black", style: Style::Line, points: function_series(f, range) },
            Series { label: "Beurling".into(), color: "gray", style: Style::Line, points: beurling_series(mu, range) },
        ],
    ))
}

/// Draws a domain file (arcs, gates, base point) or the graph of a
/// function file. Writes `render.svg`.
pub fn cmd_render(file: &Path, cfg: &RunConfig) -> CliResult<Output> {
    let v: serde_json::Value = read_json(file)?;
    let svg = if v.get("breakpoints").is_some() {
        let f: FunctionFile = serde_json::from_value(v).map_err(|e| CliError::input(e.to_string()))?;
        function_plot(&f.into_function()?)?
    } else {
        let d: DomainFile = serde_json::from_value(v).map_err(|e| CliError::input(e.to_string()))?;
        domain_svg(&d.into_domain()?)
    };
    emit(cfg, "render.svg", svg, Vec::new())
}

fn construct_files(dir: &Path, f: &CandidateH<f64>, rep: &ConstructionReport) -> CliResult<Vec<String>> {
    let mut notes = Vec::new();
    write_out(dir, "report.json", &to_json(rep))?;
    let range = plot_range(f)?;
    for nr in &rep.per_n {
        let n = nr.n;
        if nr.psi.is_empty() {
            continue;
        }
        let x = CircleDomain::new(nr.step_radii.clone(), nr.psi.clone())?;
        write_out(dir, &format!("x_n{n}.json"), &to_json(&DomainFile::from_circle(&x)))?;
        write_out(dir, &format!("x_n{n}.svg"), &domain_svg(&LoadedDomain::Circle(x)))?;
        if let Some(o) = &nr.omega {
            write_out(dir, &format!("omega_n{n}.json"), &to_json(&DomainFile::from_blocked(o)))?;
            write_out(dir, &format!("omega_n{n}.svg"), &domain_svg(&LoadedDomain::Blocked(o.clone())))?;
        }
        if let Some(m) = &nr.measured {
            let rows: Vec<Vec<String>> = (0..m.radii.len())
                .map(|i| {
                    vec![
                        num(m.radii[i]),
                        num(m.f[i]),
                        m.continuity[i].to_string(),
                        num(m.h_x[i].value),
                        num(m.h_x[i].std_error),
                        num(m.h_omega[i].value),
                        num(m.h_omega[i].std_error),
                    ]
                })
                .collect();
            let header = ["r", "f", "continuous", "h_x", "se_x", "h_omega", "se_omega"];
            write_out(dir, &format!("h_n{n}.csv"), &csv_table(&header, &rows))?;
            let dots = |h: &[hmdf::MeasureEstimate]| m.radii.iter().zip(h).map(|(r, e)| (*r, e.value)).collect();
            let plot = plot_svg(
                range,
                &[
                    Series { label: "f".into(), color: "black", style: Style::Line, points: function_series(f, range) },
                    Series { label: format!("h of X_{n}"), color: "gray", style: Style::Dots, points: dots(&m.h_x) },
                    Series { label: format!("h of Omega_{n}"), color: "blue", style: Style::Dots, points: dots(&m.h_omega) },
                ],
            );
            write_out(dir, &format!("h_n{n}.svg"), &plot)?;
        }
    }
    match boundary_profile(f, 721) {
        Ok(p) => write_out(dir, "profile.svg", &curve_svg(&profile_points(&p)))?,
        Err(e) => notes.push(format!("no boundary profile: {e}")),
    }
    Ok(notes)
}

fn construct_summary(rep: &ConstructionReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "n,converged,sup_residual,kappa,sigma,min_psi,f_gap,f_gap_se,gate_gap,hdiff_bound");
    for nr in &rep.per_n {
        let sup = nr.solve_residuals.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        let (fg, fse, gg) = nr.measured.as_ref().map_or((f64::NAN, f64::NAN, f64::NAN), |m| (m.f_gap, m.f_gap_se, m.gate_gap));
        let hb = nr.hdiff_bound.map_or(f64::NAN, |b| b.value);
        let _ = writeln!(
            s,
            "{},{},{sup:.3e},{:.4e},{},{:.4},{fg:.3e},{fse:.1e},{gg:.3e},{hb:.3e}",
            nr.n, nr.converged, nr.kappa, nr.sigma, nr.min_psi
        );
    }
    let c = &rep.conditions;
    for (name, v) in [
        ("kappa to zero", &c.kappa_to_zero),
        ("kappa not too fast", &c.kappa_not_too_fast),
        ("alpha positive", &c.alpha_positive),
        ("few short arcs", &c.few_short_arcs),
        ("convergence", &rep.convergence),
        ("threshold", &rep.check.fjump),
    ] {
        let _ = writeln!(s, "{name}: {} ({})", if v.passed() { "PASS" } else { "FAIL" }, v.detail);
    }
    if let Some(u) = &rep.ulc {
        let _ = writeln!(s, "ulc: {} ({} violations)", if u.passed() { "PASS" } else { "FAIL" }, u.violations.len());
    }
    s
}

/// Runs the construction for every `n` in `cfg.n` and writes the report
/// directory (default `hmdf-out`): `report.json`, per-`n` domain files,
/// CSVs and SVGs, and `profile.svg`.
pub fn cmd_construct(function: &Path, cfg: &RunConfig) -> CliResult<Output> {
    cfg.validate()?;
    let f = read_json::<FunctionFile>(function)?.into_function()?;
    let pc = PipelineConfig {
        inversion: hmdf::construct::Engine::Fd(cfg.fd()),
        solve: SolveOptions { tol: cfg.tol, ..SolveOptions::default() },
        measure: cfg.engine_or(EngineKind::Wos),
        seed: cfg.seed,
        ..PipelineConfig::default()
    };
    let rep = run_pipeline(&f, &cfg.n, &pc)?;
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("hmdf-out"));
    let mut notes = construct_files(&dir, &f, &rep)?;
    notes.push(format!("report written to {}", dir.display()));
    Ok(Output { stdout: construct_summary(&rep), notes })
}

fn emit(cfg: &RunConfig, name: &str, text: String, mut notes: Vec<String>) -> CliResult<Output> {
    match &cfg.out {
        Some(dir) => {
            write_out(dir, name, &text)?;
            notes.push(format!("wrote {}", dir.join(name).display()));
            Ok(Output { stdout: String::new(), notes })
        }
        None => Ok(Output { stdout: text, notes }),
    }
}
