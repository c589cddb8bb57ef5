mod common;

use archinf::weights::{check_assumptions, frac_coeffs, weights, ModelSpec};
use common::{all_specs, brute_weights, frac_gamma_ratio, frac_product, sample_zeta};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn frac_coeffs_match_gamma_ratio() {
    for &d in &[0.1, 0.3, 0.5, 0.77, 0.99] {
        let fc = frac_coeffs(d, 1000).unwrap();
        for (j, v) in fc.iter().enumerate() {
            if j < 150 {
                assert!(rel_err(*v, frac_gamma_ratio(d, j + 1)) < 1e-12, "d={d} j={}", j + 1);
            }
            assert!(rel_err(*v, frac_product(d, j + 1)) < 1e-12, "d={d} j={}", j + 1);
        }
    }
}

#[test]
fn recursive_weights_match_defining_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for spec in all_specs() {
        for _ in 0..5 {
            let u: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
            let zeta = sample_zeta(&spec, &u);
            let fast = weights(&spec, &zeta, 1000).unwrap_or_else(|e| panic!("{spec:?} {zeta:?}: {e}"));
            let slow = brute_weights(&spec, &zeta, 1000);
            for j in 0..1000 {
                if slow[j] < 1e-290 {
                    continue;
                }
                assert!(
                    rel_err(fast[j], slow[j]) < 1e-12,
                    "{:?} zeta={zeta:?} j={} fast={} slow={}",
                    spec.family,
                    j + 1,
                    fast[j],
                    slow[j]
                );
            }
        }
    }
}

#[test]
fn partial_sums_approach_closed_form_limit() {
    // Fgarch: psi(1) = a(1) / b(1); Figarch: psi(1) = 1
    let spec = ModelSpec::fgarch(1, 1);
    let zeta = [0.5, 0.3, 0.6];
    let n = 100_000;
    let psi = weights(&spec, &zeta, n).unwrap();
    let total: f64 = psi.iter().sum();
    let limit = 0.5 / 0.7;
    assert!(total < limit);
    let tail_k = psi[n - 1] * (n as f64).powf(1.6);
    assert!(limit - total <= 2.0 * tail_k / 0.6 * (n as f64).powf(-0.6));

    let fig = weights(&ModelSpec::figarch(0, 0), &[0.4], n).unwrap();
    let s: f64 = fig.iter().sum();
    assert!(s < 1.0 && 1.0 - s < 0.05);
}

#[test]
fn rank_determinant_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let a1 = 0.05 + 0.9 * rng.random::<f64>();
        let d = 0.05 + 0.9 * rng.random::<f64>();
        let rep = check_assumptions(&ModelSpec::fgarch(1, 0), &[a1, d], 200, 64).unwrap();
        assert_eq!(rep.rank, 2);
        assert_eq!(rep.rank_rows, vec![1, 2]);
        assert!((rep.rank_determinant.unwrap() + a1 * d * d / 2.0).abs() < 1e-8);
    }
}
