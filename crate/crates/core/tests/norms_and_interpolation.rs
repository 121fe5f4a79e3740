use extsob::interpolation::{interpolation_norm, verify_lemma3_param_equality, verify_prop1_equality, HilbertCouple};
use extsob::ro::{make_interpolation_parameter, RoFunction, DEFAULT_INDEX_MARGIN};
use extsob::spectral::{hoermander_norm, param_norm, sobolev_norm, SpectralField, TorusGrid};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Weights with gates placed around their sampled indices, which log
/// factors inflate beyond the true values.
fn weights() -> Vec<(RoFunction, f64, f64)> {
    [
        RoFunction::power(0.5),
        RoFunction::log_power(1.0, vec![1.0]),
        RoFunction::log_power(2.0, vec![-1.0, 2.0]),
        RoFunction::power(-1.5),
    ]
    .into_iter()
    .map(|phi| {
        let est = phi.indices().unwrap();
        (phi, est.sigma0 - DEFAULT_INDEX_MARGIN, est.sigma1 + DEFAULT_INDEX_MARGIN)
    })
    .collect()
}

#[test]
fn prop1_across_weights_and_gates() {
    let g = TorusGrid::new(&[64, 64]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for (phi, s_lo, s_hi) in weights() {
        for (a, b) in [(1.0, 1.0), (0.5, 3.0), (4.0, 0.5)] {
            for _ in 0..5 {
                let u = SpectralField::random(&g, &mut rng, 1.5);
                let r = verify_prop1_equality(&u, &phi, s_lo - a, s_hi + b).unwrap();
                assert!(r <= 1e-10, "{r}");
            }
        }
    }
}

#[test]
fn lemma3_residual_does_not_grow_with_r() {
    let g = TorusGrid::new(&[32, 32]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let u = SpectralField::random(&g, &mut rng, 2.0);
    let eta = RoFunction::log_power(1.0, vec![1.0]);
    for r in [0.0, 1.0, 1e2, 1e4, 1e6, 1e8] {
        let res = verify_lemma3_param_equality(&u, &eta, -1.0, 3.0, 1.0, r).unwrap();
        assert!(res <= 1e-10, "r = {r}: {res}");
    }
}

#[test]
fn sobolev_special_case() {
    let g = TorusGrid::new(&[16, 16]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = SpectralField::random(&g, &mut rng, 0.0);
    let c = HilbertCouple::sobolev(0.0, 2.0, &g).unwrap();
    let psi = make_interpolation_parameter(&RoFunction::power(1.0), 0.0, 2.0, DEFAULT_INDEX_MARGIN).unwrap();
    let a = interpolation_norm(&u, &c, &psi).unwrap();
    assert!((a - sobolev_norm(&u, 1.0)).abs() <= 1e-13 * a);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn param_norm_is_monotone_and_bracketed(seed in 0u64..1000, r in 0.0..1e4f64, theta in 0.0..3.0f64) {
        let g = TorusGrid::new(&[8, 8]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = SpectralField::random(&g, &mut rng, 1.0);
        let eta = RoFunction::power(0.7);
        let base = hoermander_norm(&u, &eta).unwrap();
        let p = param_norm(&u, &eta, r, theta).unwrap();
        let q = param_norm(&u, &eta, 2.0 * r + 1.0, theta).unwrap();
        let low = hoermander_norm(&u, &eta.times_power(-theta)).unwrap();
        prop_assert!(p >= base * (1.0 - 1e-14));
        prop_assert!(q >= p * (1.0 - 1e-14));
        // (a² + r²b²)^½ ≤ a + r b
        prop_assert!(p <= (base + r * low) * (1.0 + 1e-14));
    }
}
