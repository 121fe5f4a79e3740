use std::f64::consts::PI;

use extsob::estimates::{apriori_constants, estimate_sweep, verify_sandwich, SolveConfig, SweepSpec, TrialCorpus};
use extsob::psdo::ParameterFamily;
use extsob::ro::RoFunction;
use extsob::spectral::{SpectralField, TorusGrid};
use extsob::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn exact_constants_match_a_lattice_scan() {
    let g = TorusGrid::new(&[32, 32]).unwrap();
    let compiled = ParameterFamily::laplacian_resolvent(2).compile(&g).unwrap();
    let corpus = TrialCorpus::random_only(&g, 1, 2);
    for (phi, s) in [(RoFunction::one(), 0.0), (RoFunction::power(1.0), 1.0), (RoFunction::power(2.0), 2.0)] {
        for r in [0.3, 10.0, 1e5] {
            let op = compiled.at(Complex64::new(-r, 0.0));
            let c = apriori_constants(&op, &phi, &corpus).unwrap();
            // Oracle: brute-force scan of the per-frequency ratios.
            let (mut up, mut low) = (0.0f64, 0.0f64);
            for k in 0..g.len() {
                let f = g.frequency(k);
                let sq = (f[0] * f[0] + f[1] * f[1]) as f64;
                let t = (1.0 + sq).sqrt();
                let ph = t.powf(s);
                let middle = ph * t * t + r * ph;
                let image = ph * (sq + r);
                up = up.max(middle / image);
                low = low.max(image / middle);
            }
            assert!((c.c_upper_exact.unwrap() - up).abs() <= 1e-12 * up);
            assert!((c.c_lower_exact.unwrap() - low).abs() <= 1e-12 * low);
            // Mixed fields split the middle term across two norms; the
            // sandwich inequality caps the gain over single modes at √2.
            assert!(c.c_upper <= std::f64::consts::SQRT_2 * c.c_upper_exact.unwrap() * (1.0 + 1e-12));
        }
    }
}

#[test]
fn lower_constant_survives_loss_of_ellipticity() {
    // −Δ − λ along arg λ = 0 hits the spectrum at every λ = |ξ|².
    let g = TorusGrid::new(&[16, 16]).unwrap();
    let compiled = ParameterFamily::laplacian_resolvent(2).compile(&g).unwrap();
    let spec = SweepSpec {
        args: vec![0.0],
        radii: (1..=40).map(|k| k as f64 * 0.5).collect(),
    };
    let corpus = TrialCorpus::standard(&g, 5);
    let rhs = corpus.fields()[0].clone();
    let rows = estimate_sweep(&compiled, &RoFunction::power(1.0), &spec, &corpus, &rhs, &SolveConfig::default()).unwrap();
    assert!(rows.iter().all(|r| r.c_lower <= 1.0 && r.c_lower_exact.unwrap() <= 1.0));
    let singular: Vec<_> = rows.iter().filter(|r| r.c_upper.is_infinite()).collect();
    assert!(!singular.is_empty());
    assert!(singular.iter().all(|r| r.witness.is_some() && r.residual.is_none()));
}

#[test]
fn sandwich_on_random_samples() {
    let g = TorusGrid::new(&[16, 16]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let phis = [RoFunction::one(), RoFunction::log_power(0.5, vec![1.0]), RoFunction::power(-1.0)];
    for i in 0..300 {
        let decay = rng.random_range(0.0..3.0);
        let u = SpectralField::random(&g, &mut rng, decay);
        let lambda = Complex64::from_polar(10f64.powf(rng.random_range(-4.0..6.0)), rng.random_range(-PI..PI));
        let s = verify_sandwich(&u, &phis[i % 3], lambda, 2.0, 1 + i % 2).unwrap();
        assert!(s.max_violation <= 1e-12);
    }
}
