use extsob::estimates::{relative_residual, solve, solve_with, SolveConfig};
use extsob::psdo::{HomogeneousComponent, LinearOperator, ParameterFamily, PolyhomSymbol};
use extsob::spectral::{SpectralField, TorusGrid};
use extsob::Complex64;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// −Δ + (2 + cos x₁) − λ on T¹.
fn variable_family() -> ParameterFamily {
    ParameterFamily::new(
        2.0,
        vec![
            PolyhomSymbol::multiplication(1, "-1").unwrap(),
            PolyhomSymbol::new(
                1,
                vec![
                    HomogeneousComponent::parse(2.0, "abs_xi^2").unwrap(),
                    HomogeneousComponent::parse(0.0, "2+cos(x_1)").unwrap(),
                ],
            )
            .unwrap(),
        ],
    )
    .unwrap()
}

#[test]
fn variable_coefficients_match_dense_direct_solve() {
    let n = 64;
    let g = TorusGrid::new(&[n]).unwrap();
    let lambda = Complex64::new(-10.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let f = SpectralField::random(&g, &mut rng, 0.0);

    // Oracle: in the Fourier basis multiplication by cos x couples k to k ± 1
    // (cyclically on the grid) with weight ½; the rest is diagonal.
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    for row in 0..n {
        let k = g.frequency(row)[0] as f64;
        a[(row, row)] = Complex64::new(k * k + 2.0 + 10.0, 0.0);
        a[(row, (row + 1) % n)] += Complex64::new(0.5, 0.0);
        a[(row, (row + n - 1) % n)] += Complex64::new(0.5, 0.0);
    }
    let b = DVector::from_column_slice(f.coeffs());
    let direct = a.lu().solve(&b).unwrap();

    let s = solve(&variable_family(), lambda, &f, &SolveConfig::default()).unwrap();
    let diff: f64 = s.u.coeffs().iter().zip(direct.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let scale: f64 = direct.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    assert!(diff / scale < 1e-9, "{}", diff / scale);
    assert!(s.residual <= 1e-10);
}

#[test]
fn resolvent_of_the_laplacian_on_every_mode() {
    let g = TorusGrid::new(&[8, 8]).unwrap();
    let lap = ParameterFamily::laplacian_resolvent(2);
    let lambda = Complex64::new(-3.0, 2.0);
    for k in 0..g.len() {
        let xi = g.frequency(k);
        let f = SpectralField::single_mode(&g, &xi, Complex64::new(1.0, -1.0)).unwrap();
        let s = solve(&lap, lambda, &f, &SolveConfig::default()).unwrap();
        let want = Complex64::new(1.0, -1.0) / (Complex64::new((xi[0] * xi[0] + xi[1] * xi[1]) as f64, 0.0) - lambda);
        assert_eq!(s.u.coeff(&xi), want);
        assert!(s.residual <= 1e-14);
    }
}

#[test]
fn round_trip_on_random_fields_along_the_left_ray() {
    let g = TorusGrid::new(&[64]).unwrap();
    let compiled = variable_family().compile(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for r in [1.0, 1e2, 1e4, 1e6] {
        let op = compiled.at(Complex64::new(-r, 0.0));
        for _ in 0..4 {
            let f = SpectralField::random(&g, &mut rng, 2.0);
            let s = solve_with(&op, &f, &SolveConfig::default()).unwrap();
            let back = relative_residual(&op, &s.u, &f).unwrap();
            assert!(back <= 1e-10, "r = {r}: {back}");
            assert_eq!(op.grid().len(), 64);
        }
    }
}
