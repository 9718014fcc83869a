use hmdf::geometry::{BlockedCircleDomain, CircleDomain, OffCenterDisk};
use hmdf::potential::*;
use hmdf::{FeatureKind, Target};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const OFFCENTER_V_STAR: f64 = 0.741_291_869_765_498_7;
const SLIT_FULL_GATE_1_2: f64 = 0.216_346_895_938_785_5;

fn walks(samples: usize, seed: u64) -> WosConfig {
    WosConfig { samples, seed, ..WosConfig::default() }
}

#[test]
fn offcenter_value_agrees_with_fine_shell_walks() {
    let d = OffCenterDisk::new(Complex::new(0.5, 0.0), 1.0).unwrap();
    let cfg = WosConfig { eps_rel: 1e-6, ..walks(1_000_000, 21) };
    let e = estimate_h(&d, &[1.0], &cfg).unwrap().estimates[0];
    assert!((e.value - OFFCENTER_V_STAR).abs() < 3.0 * e.std_error, "{} ± {}", e.value, e.std_error);
    assert_eq!(e.discards, 0);
}

#[test]
fn full_slit_gate_value() {
    let v = exact_slit_disk_gate(1.0, 2.0, 2.0).unwrap();
    assert!((v - SLIT_FULL_GATE_1_2).abs() < 1e-15);
    assert!((v - 2.0 / PI * (1.0f64 / 8.0).sqrt().atan()).abs() < 1e-15);
    let base = CircleDomain::new(vec![1.0, 2.0], vec![0.0, PI]).unwrap();
    let d = BlockedCircleDomain::new(base, vec![0.0]).unwrap();
    let e = wos_ensemble(&d, Complex::new(0.0, 0.0), &walks(200_000, 22))
        .unwrap()
        .measure(&Target::Feature { kind: FeatureKind::Gate, index: 0 });
    assert!((e.value - v).abs() < 3.0 * e.std_error, "{} vs {v}", e.value);
}

fn random_blocked(rng: &mut ChaCha8Rng) -> BlockedCircleDomain<f64> {
    let n = rng.random_range(1..=4usize);
    let mut radii = vec![rng.random_range(0.5..1.5)];
    for _ in 0..n {
        let r = *radii.last().unwrap();
        radii.push(r * (1.0 + rng.random_range(0.05..0.5)));
    }
    let mut psi: Vec<f64> = (0..n).map(|_| rng.random_range(0.3..2.8)).collect();
    psi.push(PI);
    let phi = (0..n)
        .map(|k| {
            let cap = psi[k].min(psi[k + 1]);
            if rng.random_bool(0.3) {
                0.0
            } else {
                cap * rng.random_range(0.0..1.0)
            }
        })
        .collect();
    BlockedCircleDomain::new(CircleDomain::new(radii, psi).unwrap(), phi).unwrap()
}

#[test]
fn fd_and_walks_agree_on_random_domains() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..4 {
        let d = random_blocked(&mut rng);
        let radii = d.base().radii().to_vec();
        let targets: Vec<Target> = radii.iter().map(|&r| Target::ModulusAtMost(r)).collect();
        let fd = fd_with_error(&FdLayout::from(&d), &targets, &FdConfig::default()).unwrap();
        let w = estimate_h(&d, &radii, &walks(200_000, 30 + case)).unwrap();
        for ((m, err), e) in fd.iter().zip(&w.estimates) {
            let tol = (3.0 * e.std_error).max(2.0 * err);
            assert!((m.value - e.value).abs() <= tol, "case {case}: fd {} wos {} tol {tol}", m.value, e.value);
        }
        let x = d.base();
        let fx = fd_harmonic_measure(&FdLayout::from(x), &targets, &FdConfig::default()).unwrap();
        let wx = estimate_h(x, &radii, &walks(200_000, 40 + case)).unwrap();
        for (m, e) in fx.iter().zip(&wx.estimates) {
            assert!((m.value - e.value).abs() <= 3.0 * e.std_error + 2e-3, "case {case}: {} vs {}", m.value, e.value);
        }
    }
}

#[test]
fn blocked_domains_respect_the_beurling_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..6 {
        let d = random_blocked(&mut rng);
        assert_eq!(d.validate().simply_connected, Some(true));
        let mu = d.base().radii()[0];
        let big_m = *d.base().radii().last().unwrap();
        let radii: Vec<f64> = (0..=20).map(|i| mu + (big_m - mu) * i as f64 / 20.0).collect();
        let t = estimate_h(&d, &radii, &walks(50_000, 50 + case)).unwrap();
        for (r, e) in radii.iter().zip(&t.estimates) {
            let b = beurling_lower_bound(mu, *r).unwrap();
            assert!(e.value >= b - 3.0 * e.std_error, "case {case} r={r}: {} < {b}", e.value);
        }
        assert!(t.values().windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn default_walks_rarely_stall() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..3 {
        let d = random_blocked(&mut rng);
        let e = wos_ensemble(&d, Complex::new(0.0, 0.0), &walks(20_000, 60 + case)).unwrap();
        let n = d.base().n();
        let mut total = e.measure(&Target::Feature { kind: FeatureKind::OuterCircle, index: n }).value;
        for k in 0..n {
            total += e.measure(&Target::Feature { kind: FeatureKind::Arc, index: k }).value;
            total += e.measure(&Target::Feature { kind: FeatureKind::Gate, index: k }).value;
        }
        assert!((total - 1.0).abs() < 1e-12);
        assert!((e.discards as f64) < 1e-3 * 20_000.0);
        let h = e.h_table(&[*d.base().radii().last().unwrap()]);
        assert_eq!(h.estimates[0].value, 1.0);
    }
}

#[test]
fn solved_two_arc_domain_is_self_consistent() {
    use hmdf::construct::{solve_circle_domain, Engine, SolveOptions};
    use hmdf::hfunction::StepH;
    let s = StepH::new(vec![1.0, 1.6], vec![0.5, 1.0]).unwrap();
    let x = solve_circle_domain(&s, &Engine::default(), &SolveOptions::default()).unwrap();
    let e = estimate_h(&x.domain, &[1.0], &walks(200_000, 70)).unwrap().estimates[0];
    assert!((e.value - 0.5).abs() <= 1e-3 + 3.0 * e.std_error, "{}", e.value);
}
