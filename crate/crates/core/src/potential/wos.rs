//! Walk-on-spheres estimator of exit distributions from a point.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{HFunctionTable, MeasureEstimate, Method, Target};
use crate::error::{Error, Result};
use crate::geometry::{Domain, FeatureKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WosConfig {
    pub samples: usize,
    /// Shell thickness relative to the outer radius.
    pub eps_rel: f64,
    pub max_steps: usize,
    pub seed: u64,
    /// Negate every angular draw (for paired symmetry checks).
    pub reflect: bool,
}

impl Default for WosConfig {
    fn default() -> Self {
        WosConfig { samples: 100_000, eps_rel: 1e-5, max_steps: 10_000, seed: 0, reflect: false }
    }
}

/// Where a walk stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exit {
    pub kind: FeatureKind,
    pub index: usize,
    pub modulus: f64,
    /// Final position, within the shell of the boundary.
    pub point: Complex<f64>,
}

/// Runs one walk; `Ok(None)` if the step cap is reached.
pub fn wos_exit_sample<D, R>(
    d: &D,
    z0: Complex<f64>,
    eps: f64,
    max_steps: usize,
    reflect: bool,
    rng: &mut R,
) -> Result<Option<Exit>>
where
    D: Domain<f64> + ?Sized,
    R: Rng + ?Sized,
{
    if !(eps > 0.0) {
        return Err(Error::OutOfRange("shell thickness must be positive".into()));
    }
    if !d.contains(z0) {
        return Err(Error::NotInterior);
    }
    let sign = if reflect { -1.0 } else { 1.0 };
    let mut z = z0;
    for _ in 0..max_steps {
        let (dist, feature) = d.nearest(z, true);
        if dist < eps {
            return Ok(Some(Exit { kind: feature.kind, index: feature.index, modulus: feature.modulus, point: z }));
        }
        let t = sign * std::f64::consts::TAU * rng.random::<f64>();
        let (s, c) = t.sin_cos();
        z += Complex::new(dist * c, dist * s);
    }
    Ok(None)
}

/// All completed exits of a seeded ensemble of walks.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitEnsemble {
    pub exits: Vec<Exit>,
    pub discards: usize,
}

impl ExitEnsemble {
    fn estimate(&self, hits: usize) -> MeasureEstimate {
        let n = self.exits.len();
        let p = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
        let se = if n == 0 { 0.0 } else { (p * (1.0 - p) / n as f64).sqrt() };
        MeasureEstimate { value: p, std_error: se, method: Method::Wos, samples: n, discards: self.discards }
    }

    pub fn measure(&self, target: &Target) -> MeasureEstimate {
        let hits = self.exits.iter().filter(|e| target.matches(e.kind, e.index, e.modulus)).count();
        self.estimate(hits)
    }

    /// Empirical CDF of the exit modulus at each radius (closed balls).
    pub fn h_table(&self, radii: &[f64]) -> HFunctionTable {
        let mut moduli: Vec<f64> = self.exits.iter().map(|e| e.modulus).collect();
        moduli.sort_by(|a, b| a.total_cmp(b));
        let estimates = radii
            .iter()
            .map(|&r| self.estimate(moduli.partition_point(|&m| m <= r)))
            .collect();
        HFunctionTable { radii: radii.to_vec(), estimates }
    }
}

/// Runs `cfg.samples` walks from `z0`. Walk `i` draws from its own ChaCha
/// stream, so the result does not depend on the thread count.
pub fn wos_ensemble<D>(d: &D, z0: Complex<f64>, cfg: &WosConfig) -> Result<ExitEnsemble>
where
    D: Domain<f64> + ?Sized,
{
    if !d.contains(z0) {
        return Err(Error::NotInterior);
    }
    let eps = cfg.eps_rel * d.outer_radius();
    let results: Vec<Result<Option<Exit>>> = (0..cfg.samples)
        .into_par_iter()
        .with_min_len(256)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            wos_exit_sample(d, z0, eps, cfg.max_steps, cfg.reflect, &mut rng)
        })
        .collect();
    let mut exits = Vec::with_capacity(results.len());
    let mut discards = 0;
    for r in results {
        match r? {
            Some(e) => exits.push(e),
            None => discards += 1,
        }
    }
    Ok(ExitEnsemble { exits, discards })
}

/// h-function from the origin at the given (sorted) radii.
pub fn estimate_h<D>(d: &D, radii: &[f64], cfg: &WosConfig) -> Result<HFunctionTable>
where
    D: Domain<f64> + ?Sized,
{
    if radii.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::OutOfRange("radii must be sorted".into()));
    }
    Ok(wos_ensemble(d, Complex::new(0.0, 0.0), cfg)?.h_table(radii))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BlockedCircleDomain, CircleDomain, OffCenterDisk};
    use crate::potential::exact::{exact_offcenter_disk_h, exact_slit_disk_gate};
    use std::f64::consts::PI;

    fn cfg(samples: usize, seed: u64) -> WosConfig {
        WosConfig { samples, seed, ..WosConfig::default() }
    }

    #[test]
    fn disk_exits_on_its_circle() {
        let d = CircleDomain::disk(2.0).unwrap();
        let t = estimate_h(&d, &[0.5, 1.9, 2.0, 3.0], &cfg(2000, 1)).unwrap();
        assert_eq!(t.values(), vec![0.0, 0.0, 1.0, 1.0]);
        assert!(t.estimates.iter().all(|e| e.discards == 0));
    }

    #[test]
    fn rejects_exterior_start() {
        let d = CircleDomain::disk(1.0).unwrap();
        assert_eq!(wos_ensemble(&d, Complex::new(2.0, 0.0), &cfg(10, 0)), Err(Error::NotInterior));
    }

    #[test]
    fn unit_disk_exit_angles_are_uniform() {
        let d = CircleDomain::disk(1.0).unwrap();
        let e = wos_ensemble(&d, Complex::new(0.0, 0.0), &cfg(100_000, 7)).unwrap();
        let mut u: Vec<f64> = e.exits.iter().map(|x| (x.point.arg() + PI) / (2.0 * PI)).collect();
        u.sort_by(|a, b| a.total_cmp(b));
        let n = u.len() as f64;
        let ks = u
            .iter()
            .enumerate()
            .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
            .fold(0.0, f64::max);
        // 1% critical value
        assert!(ks < 1.63 / n.sqrt(), "KS statistic {ks}");
    }

    #[test]
    fn reproducible_and_reflection_symmetric() {
        let base = CircleDomain::new(vec![1.0, 1.4, 2.0], vec![1.0, 2.0, PI]).unwrap();
        let d = BlockedCircleDomain::new(base, vec![0.4, 0.9]).unwrap();
        let radii = [1.0, 1.2, 1.4, 1.8, 2.0];
        let a = estimate_h(&d, &radii, &cfg(20_000, 3)).unwrap();
        let b = estimate_h(&d, &radii, &cfg(20_000, 3)).unwrap();
        assert_eq!(a, b);
        let refl = WosConfig { reflect: true, ..cfg(20_000, 3) };
        let e = wos_ensemble(&d, Complex::new(0.0, 0.0), &cfg(20_000, 3)).unwrap();
        let f = wos_ensemble(&d, Complex::new(0.0, 0.0), &refl).unwrap();
        for (x, y) in e.exits.iter().zip(&f.exits) {
            assert_eq!(x.modulus, y.modulus);
            assert_eq!(x.point, y.point.conj());
        }
        let upper = e.exits.iter().filter(|x| x.point.im > 0.0).count() as f64;
        let n = e.exits.len() as f64;
        assert!((upper / n - 0.5).abs() < 3.0 * (0.25 / n).sqrt());
    }

    #[test]
    fn pool_size_does_not_change_results() {
        let d = CircleDomain::new(vec![1.0, 2.0], vec![1.0, PI]).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_h(&d, &[1.0, 2.0], &cfg(5000, 11)).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn features_partition_the_boundary() {
        let base = CircleDomain::new(vec![1.0, 1.3, 1.6, 2.0], vec![0.5, 1.5, 0.8, PI]).unwrap();
        let d = BlockedCircleDomain::new(base, vec![0.2, 0.0, 0.5]).unwrap();
        let e = wos_ensemble(&d, Complex::new(0.0, 0.0), &cfg(50_000, 5)).unwrap();
        let mut total = 0.0;
        for k in 0..3 {
            total += e.measure(&Target::Feature { kind: FeatureKind::Arc, index: k }).value;
            total += e.measure(&Target::Feature { kind: FeatureKind::Gate, index: k }).value;
        }
        total += e.measure(&Target::Feature { kind: FeatureKind::OuterCircle, index: 3 }).value;
        assert!((total - 1.0).abs() < 1e-12);
        assert!((e.discards as f64) < 1e-3 * 50_000.0);
        assert_eq!(e.measure(&Target::ModulusAtMost(2.0)).value, 1.0);
    }

    #[test]
    fn blocking_lowers_outer_measure() {
        let base = CircleDomain::new(vec![1.0, 1.5, 2.0], vec![0.7, 1.2, PI]).unwrap();
        let blocked = BlockedCircleDomain::new(base.clone(), vec![0.3, 0.5]).unwrap();
        let outer = Target::Feature { kind: FeatureKind::OuterCircle, index: 2 };
        let a = wos_ensemble(&blocked, Complex::new(0.0, 0.0), &cfg(40_000, 9)).unwrap().measure(&outer);
        let b = wos_ensemble(&base, Complex::new(0.0, 0.0), &cfg(40_000, 10)).unwrap().measure(&outer);
        let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!(a.value <= b.value + 3.0 * se);
    }

    #[test]
    fn agrees_with_offcenter_oracle() {
        let d = OffCenterDisk::new(Complex::new(0.5, 0.0), 1.0).unwrap();
        let radii = [0.6, 0.8, 1.0, 1.2, 1.4];
        let t = estimate_h(&d, &radii, &cfg(100_000, 2)).unwrap();
        for (r, e) in radii.iter().zip(&t.estimates) {
            let exact = exact_offcenter_disk_h(Complex::new(0.5, 0.0), 1.0, *r).unwrap();
            assert!((e.value - exact).abs() < 4.0 * e.std_error + 1e-4, "r={r}: {} vs {exact}", e.value);
        }
    }

    #[test]
    fn agrees_with_slit_oracle() {
        let base = CircleDomain::new(vec![1.0, 1.5, 2.0], vec![0.0, 0.0, PI]).unwrap();
        let d = BlockedCircleDomain::new(base, vec![0.0, 0.0]).unwrap();
        let e = wos_ensemble(&d, Complex::new(0.0, 0.0), &cfg(100_000, 4)).unwrap();
        let m = e.measure(&Target::ModulusAtMost(1.5));
        let exact = exact_slit_disk_gate(1.0, 1.5, 2.0).unwrap();
        assert!((m.value - exact).abs() < 4.0 * m.std_error, "{} vs {exact}", m.value);
    }
}
