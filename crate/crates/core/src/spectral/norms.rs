use num_complex::Complex64;

use super::SpectralField;
use crate::error::{Error, Result};
use crate::ro::RoFunction;
use crate::sum::pairwise_sum;

/// `(Σ_ξ w(⟨ξ⟩)² |û(ξ)|²)^½` for a radial weight `w`, evaluated once per
/// distinct `|ξ|²`.
pub fn radial_weight_norm(
    u: &SpectralField,
    w: impl FnMut(f64) -> Result<f64>,
) -> Result<f64> {
    let table = u.grid().radial_table(w)?;
    Ok(table_norm(u, &table))
}

/// Weighted norm for a table indexed by `|ξ|²` (see
/// [`TorusGrid::radial_table`](super::TorusGrid::radial_table)).
pub fn table_norm(u: &SpectralField, table: &[f64]) -> f64 {
    let ns = u.grid().norm_sq_all();
    let terms: Vec<f64> = u
        .coeffs()
        .iter()
        .zip(ns)
        .map(|(c, &k)| {
            let w = table[k as usize];
            w * w * c.norm_sqr()
        })
        .collect();
    pairwise_sum(&terms).sqrt()
}

pub(crate) fn weight_table(u: &SpectralField, phi: &RoFunction) -> Result<Vec<f64>> {
    u.grid().radial_table(|t| phi.eval(t))
}

/// Hörmander norm `‖u‖_φ = (Σ_ξ φ(⟨ξ⟩)² |û(ξ)|²)^½`.
pub fn hoermander_norm(u: &SpectralField, phi: &RoFunction) -> Result<f64> {
    Ok(table_norm(u, &weight_table(u, phi)?))
}

/// `(u, v)_φ = Σ_ξ φ(⟨ξ⟩)² û(ξ) conj(v̂(ξ))`.
pub fn hoermander_inner(u: &SpectralField, v: &SpectralField, phi: &RoFunction) -> Result<Complex64> {
    if **u.grid() != **v.grid() {
        return Err(Error::Dimension("inner product of fields on different grids".into()));
    }
    let table = weight_table(u, phi)?;
    let ns = u.grid().norm_sq_all();
    let (re, im): (Vec<f64>, Vec<f64>) = u
        .coeffs()
        .iter()
        .zip(v.coeffs())
        .zip(ns)
        .map(|((a, b), &k)| {
            let w = table[k as usize];
            let p = a * b.conj() * (w * w);
            (p.re, p.im)
        })
        .unzip();
    Ok(Complex64::new(pairwise_sum(&re), pairwise_sum(&im)))
}

/// Sobolev norm `‖u‖_{(s)}`, i.e. the Hörmander norm for `φ = ϱ^s`.
pub fn sobolev_norm(u: &SpectralField, s: f64) -> f64 {
    let table = u
        .grid()
        .radial_table(|t| Ok::<_, Error>(crate::ro::pow_exact(t, s)))
        .unwrap_or_default();
    table_norm(u, &table)
}

/// Parameter-dependent norm
/// `‖u‖_{η,r,θ} = (Σ_ξ (1 + r²⟨ξ⟩^{−2θ}) η(⟨ξ⟩)² |û(ξ)|²)^½`.
pub fn param_norm(u: &SpectralField, eta: &RoFunction, r: f64, theta: f64) -> Result<f64> {
    if !(r >= 0.0 && theta >= 0.0) {
        return Err(Error::Domain(format!(
            "parameter norm needs r, theta >= 0, got r = {r}, theta = {theta}"
        )));
    }
    if r == 0.0 {
        return hoermander_norm(u, eta);
    }
    let table = u.grid().radial_table(|t| {
        let e = eta.eval(t)?;
        Ok::<_, Error>(e * (1.0 + r * r * t.powf(-2.0 * theta)).sqrt())
    })?;
    Ok(table_norm(u, &table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;
    use rand::SeedableRng;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn single_mode_weighted_norm() {
        let g = TorusGrid::new(&[16, 16]).unwrap();
        let u = SpectralField::single_mode(&g, &[3, 4], one()).unwrap();
        let n = hoermander_norm(&u, &RoFunction::power(2.0)).unwrap();
        assert!((n - 26.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_modes_add_in_quadrature() {
        let g = TorusGrid::new(&[8, 8]).unwrap();
        let a = SpectralField::single_mode(&g, &[1, 0], one()).unwrap();
        let b = SpectralField::single_mode(&g, &[0, 1], one()).unwrap();
        let u = a.add_scaled(one(), &b).unwrap();
        let n = hoermander_norm(&u, &RoFunction::power(2.0)).unwrap();
        assert!((n - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(hoermander_norm(&SpectralField::zeros(&g), &RoFunction::power(2.0)).unwrap(), 0.0);
    }

    #[test]
    fn inner_product_matches_norm() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let g = TorusGrid::new(&[16, 8]).unwrap();
        let u = SpectralField::random(&g, &mut rng, 1.0);
        let phi = RoFunction::log_power(1.5, vec![1.0]);
        let n = hoermander_norm(&u, &phi).unwrap();
        let ip = hoermander_inner(&u, &u, &phi).unwrap();
        assert!((ip.re - n * n).abs() < 1e-12 * n * n);
        assert_eq!(ip.im, 0.0);
    }

    #[test]
    fn sobolev_zero_is_parseval() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let g = TorusGrid::new(&[32]).unwrap();
        let u = SpectralField::random(&g, &mut rng, 0.5);
        assert_eq!(sobolev_norm(&u, 0.0), u.l2_norm());
        assert_eq!(hoermander_norm(&u, &RoFunction::one()).unwrap(), u.l2_norm());
        let s = 1.3;
        let a = sobolev_norm(&u, s);
        let b = hoermander_norm(&u, &RoFunction::power(s)).unwrap();
        assert!((a - b).abs() < 1e-13 * a);
    }

    #[test]
    fn parameter_norm_examples() {
        let g = TorusGrid::new(&[16, 16]).unwrap();
        let c = SpectralField::single_mode(&g, &[0, 0], one()).unwrap();
        let n = param_norm(&c, &RoFunction::one(), 1.0, 1.0).unwrap();
        assert!((n - 2f64.sqrt()).abs() < 1e-15);

        let u = SpectralField::single_mode(&g, &[3, 4], one()).unwrap();
        // η = t, θ = 2, r = 26 on ⟨ξ⟩² = 26: 26·(1 + 26²·26⁻²) = 52.
        let n = param_norm(&u, &RoFunction::power(1.0), 26.0, 2.0).unwrap();
        assert!((n - 52f64.sqrt()).abs() < 1e-12);

        let eta = RoFunction::power(0.7);
        assert_eq!(
            param_norm(&u, &eta, 0.0, 3.0).unwrap(),
            hoermander_norm(&u, &eta).unwrap()
        );
        assert!(param_norm(&u, &eta, -1.0, 0.0).is_err());
        assert!(param_norm(&u, &eta, 1.0, -0.5).is_err());
    }

    #[test]
    fn parameter_norm_monotone_in_r() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let g = TorusGrid::new(&[8, 8]).unwrap();
        let u = SpectralField::random(&g, &mut rng, 2.0);
        let eta = RoFunction::power(1.0);
        let mut prev = 0.0;
        for r in [0.0, 0.5, 1.0, 10.0, 1e3, 1e6] {
            let n = param_norm(&u, &eta, r, 1.0).unwrap();
            assert!(n >= prev);
            prev = n;
        }
    }
}
