use hmdf::bounds::{channel_bound_curved, gate_axis_bound, hdiff_bound};
use hmdf::geometry::{BlockedCircleDomain, CircleDomain};
use hmdf::potential::{wos_ensemble, WosConfig};
use hmdf::{FeatureKind, Target};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn domain(rng: &mut ChaCha8Rng) -> BlockedCircleDomain<f64> {
    let n = rng.random_range(1..=6usize);
    let mut radii = vec![rng.random_range(0.5..1.5)];
    for _ in 0..n {
        let r = *radii.last().unwrap();
        // narrow channels make the exponential bounds informative
        radii.push(r * (1.0 + rng.random_range(0.005..0.3)));
    }
    let mut psi: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..3.0)).collect();
    psi.push(PI);
    let phi = (0..n)
        .map(|k| if rng.random_bool(0.3) { 0.0 } else { psi[k].min(psi[k + 1]) * rng.random_range(0.0..1.0) })
        .collect();
    BlockedCircleDomain::new(CircleDomain::new(radii, psi).unwrap(), phi).unwrap()
}

#[test]
fn measured_gates_and_gaps_respect_the_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..5u64 {
        let d = domain(&mut rng);
        let cfg = WosConfig { samples: 100_000, seed: case, ..WosConfig::default() };
        let o = wos_ensemble(&d, Complex::new(0.0, 0.0), &cfg).unwrap();
        let x = wos_ensemble(d.base(), Complex::new(0.0, 0.0), &cfg).unwrap();
        let r = d.base().radii();
        let psi = d.base().psi();
        for (k, &phi) in d.gate_angles().iter().enumerate() {
            let g = o.measure(&Target::Feature { kind: FeatureKind::Gate, index: k });
            if phi > 0.0 {
                let b = channel_bound_curved(r[k], r[k + 1], phi, psi[k].min(psi[k + 1])).unwrap();
                assert!(g.value / 2.0 <= b.value + 1.5 * g.std_error, "case {case} gate {k}");
            } else {
                let b = gate_axis_bound(r[k], r[k + 1]).unwrap();
                assert!(g.value <= b.value + 3.0 * g.std_error, "case {case} axis gate {k}");
            }
        }
        let bound = hdiff_bound(&d).value;
        let mut at: Vec<f64> = r.to_vec();
        at.extend(r.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        at.sort_by(f64::total_cmp);
        let (hx, ho) = (x.h_table(&at), o.h_table(&at));
        for (a, b) in hx.estimates.iter().zip(&ho.estimates) {
            let se = a.std_error.hypot(b.std_error);
            assert!((a.value - b.value).abs() <= bound + 3.0 * se, "case {case}");
        }
    }
}
