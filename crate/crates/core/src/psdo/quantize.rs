use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::symbol::{abs_pow, PolyhomSymbol};
use crate::error::{Error, Result};
use crate::expr::{Env, Expr};
use crate::spectral::{transform_forward, transform_inverse, SpectralField, TorusGrid};

/// Largest lattice on which a non-separable variable symbol is applied by
/// the direct `O(N²)` sum.
pub const DENSE_CAPACITY: usize = 1 << 14;

/// A linear map of band-limited fields on one grid.
pub trait LinearOperator: Sync {
    fn grid(&self) -> &Arc<TorusGrid>;

    fn apply(&self, u: &SpectralField) -> Result<SpectralField>;

    /// Per-frequency values when the operator is a Fourier multiplier.
    fn multiplier(&self) -> Option<&[Complex64]> {
        None
    }
}

pub(crate) fn check_grid(expected: &TorusGrid, u: &SpectralField) -> Result<()> {
    if *expected != **u.grid() {
        return Err(Error::Dimension(format!(
            "operator lives on {:?}, field on {:?}",
            expected.sizes(),
            u.grid().sizes()
        )));
    }
    Ok(())
}

/// A Fourier multiplier `v̂(ξ) = m(ξ)·û(ξ)`.
#[derive(Debug, Clone)]
pub struct Multiplier {
    grid: Arc<TorusGrid>,
    values: Vec<Complex64>,
}

impl Multiplier {
    pub fn new(grid: &Arc<TorusGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "multiplier has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Multiplier {
            grid: grid.clone(),
            values,
        })
    }

    /// `m(ξ) = f(ξ, ⟨ξ⟩)`.
    pub fn from_fn(grid: &Arc<TorusGrid>, f: impl Fn(&[i64], f64) -> Complex64) -> Self {
        let values = (0..grid.len())
            .map(|k| f(&grid.frequency(k), grid.smoothed(k)))
            .collect();
        Multiplier {
            grid: grid.clone(),
            values,
        }
    }

    pub fn identity(grid: &Arc<TorusGrid>) -> Self {
        Multiplier::from_fn(grid, |_, _| Complex64::new(1.0, 0.0))
    }

    pub fn zero(grid: &Arc<TorusGrid>) -> Self {
        Multiplier::from_fn(grid, |_, _| Complex64::new(0.0, 0.0))
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

impl LinearOperator for Multiplier {
    fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    fn apply(&self, u: &SpectralField) -> Result<SpectralField> {
        check_grid(&self.grid, u)?;
        Ok(u.map(|k, c| c * self.values[k]))
    }

    fn multiplier(&self) -> Option<&[Complex64]> {
        Some(&self.values)
    }
}

/// One rank-one piece `c(x)·b(ξ)` of a separable symbol, sampled on a grid.
#[derive(Debug, Clone)]
pub struct SeparableTerm {
    /// `c(x_j)` on the spatial grid.
    pub coeff_samples: Vec<Complex64>,
    /// Fourier coefficients `ĉ(k)` of the sampled `c`.
    pub coeff_hat: Vec<Complex64>,
    /// `b(ξ)` on the lattice.
    pub multiplier: Vec<Complex64>,
}

#[derive(Debug, Clone)]
enum Form {
    Multiplier(Vec<Complex64>),
    Separable {
        /// Sum of all `x`-independent terms.
        constant: Vec<Complex64>,
        terms: Vec<SeparableTerm>,
    },
    Dense(PolyhomSymbol),
}

/// A symbol compiled for one grid: `Op(s)u(x) = Σ_ξ s(x, ξ) û(ξ) e^{iξ·x}`.
#[derive(Debug, Clone)]
pub struct QuantizedSymbol {
    grid: Arc<TorusGrid>,
    order: f64,
    form: Form,
}

/// Splits a sum into signed summands.
fn summands(e: &Expr, sign: f64, out: &mut Vec<(f64, Expr)>) {
    match e {
        Expr::Add(a, b) => {
            summands(a, sign, out);
            summands(b, sign, out);
        }
        Expr::Sub(a, b) => {
            summands(a, sign, out);
            summands(b, -sign, out);
        }
        Expr::Neg(a) => summands(a, -sign, out),
        other => out.push((sign, other.clone())),
    }
}

/// `(c(x), b(ξ), homogeneous degree)` pieces, if every summand separates.
type Piece = (Expr, Expr, Option<f64>);

fn separable_pieces(s: &PolyhomSymbol) -> Option<Vec<Piece>> {
    let mut out = Vec::new();
    let mut push = |e: &Expr, degree: Option<f64>| -> Option<()> {
        let mut parts = Vec::new();
        summands(e, 1.0, &mut parts);
        for (sign, p) in parts {
            let (c, b) = p.split_separable()?;
            let c = if sign < 0.0 { Expr::Neg(Box::new(c)) } else { c };
            out.push((c, b, degree));
        }
        Some(())
    };
    match s.full() {
        Some(f) => push(f, None)?,
        None => {
            for c in s.components() {
                push(c.amplitude(), Some(c.degree()))?;
            }
        }
    }
    Some(out)
}

fn eval_freq(s: &PolyhomSymbol, b: &Expr, degree: Option<f64>, xi: &[f64]) -> Complex64 {
    let x0 = vec![0.0; xi.len()];
    match degree {
        None => b.eval(&Env::new(&x0, xi)),
        Some(d) => {
            let sq: f64 = xi.iter().map(|v| v * v).sum();
            if sq == 0.0 {
                if d == 0.0 && !b.depends_on_xi() {
                    return b.eval(&Env::direction(&x0, xi));
                }
                return Complex64::new(0.0, 0.0);
            }
            let r = sq.sqrt();
            let omega: Vec<f64> = xi.iter().map(|v| v / r).collect();
            b.eval(&Env::direction(&x0, &omega)) * (abs_pow(sq, d) * s.taper(d, r))
        }
    }
}

impl QuantizedSymbol {
    pub fn compile(s: &PolyhomSymbol, grid: &Arc<TorusGrid>) -> Result<Self> {
        if s.dim() != grid.dim() {
            return Err(Error::Dimension(format!(
                "symbol on T^{} applied on a {}-dimensional grid",
                s.dim(),
                grid.dim()
            )));
        }
        let zero_x = vec![0.0; grid.dim()];
        if !s.depends_on_x() {
            let values = (0..grid.len())
                .map(|k| s.eval(&zero_x, &grid.covector(k)))
                .collect();
            return Ok(QuantizedSymbol {
                grid: grid.clone(),
                order: s.order(),
                form: Form::Multiplier(values),
            });
        }
        if let Some(pieces) = separable_pieces(s) {
            let mut constant = vec![Complex64::new(0.0, 0.0); grid.len()];
            let mut terms = Vec::new();
            for (c, b, degree) in pieces {
                let multiplier: Vec<Complex64> = (0..grid.len())
                    .map(|k| eval_freq(s, &b, degree, &grid.covector(k)))
                    .collect();
                if !c.depends_on_x() {
                    let cv = c.eval(&Env::new(&zero_x, &zero_x));
                    for (acc, m) in constant.iter_mut().zip(&multiplier) {
                        *acc += cv * m;
                    }
                    continue;
                }
                let coeff_samples: Vec<Complex64> = (0..grid.len())
                    .map(|j| c.eval(&Env::new(&grid.spatial_point(j), &zero_x)))
                    .collect();
                let coeff_hat = transform_forward(grid, &coeff_samples)?.into_coeffs();
                terms.push(SeparableTerm {
                    coeff_samples,
                    coeff_hat,
                    multiplier,
                });
            }
            return Ok(QuantizedSymbol {
                grid: grid.clone(),
                order: s.order(),
                form: Form::Separable { constant, terms },
            });
        }
        if grid.len() > DENSE_CAPACITY {
            return Err(Error::Capacity(format!(
                "non-separable variable symbol on {} lattice points exceeds the dense limit {}; \
                 declare it as a sum of products c(x)*b(xi)",
                grid.len(),
                DENSE_CAPACITY
            )));
        }
        Ok(QuantizedSymbol {
            grid: grid.clone(),
            order: s.order(),
            form: Form::Dense(s.clone()),
        })
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn is_multiplier(&self) -> bool {
        matches!(self.form, Form::Multiplier(_))
    }

    pub fn is_separable(&self) -> bool {
        matches!(self.form, Form::Separable { .. })
    }

    /// `(x-independent part, rank-one variable terms)` of a separable
    /// symbol; a multiplier is separable with no variable terms.
    pub fn separable_parts(&self) -> Option<(&[Complex64], &[SeparableTerm])> {
        match &self.form {
            Form::Multiplier(v) => Some((v, &[])),
            Form::Separable { constant, terms } => Some((constant, terms)),
            Form::Dense(_) => None,
        }
    }

    /// The spatial mean `(2π)⁻ⁿ∫ s(x, ξ) dx` on the grid, as a multiplier.
    pub fn mean_multiplier(&self) -> Vec<Complex64> {
        match &self.form {
            Form::Multiplier(v) => v.clone(),
            Form::Separable { constant, terms } => {
                let mut out = constant.clone();
                for t in terms {
                    let c0 = t.coeff_hat[0];
                    for (o, m) in out.iter_mut().zip(&t.multiplier) {
                        *o += c0 * m;
                    }
                }
                out
            }
            Form::Dense(s) => {
                let g = &self.grid;
                let inv = 1.0 / g.len() as f64;
                (0..g.len())
                    .into_par_iter()
                    .map(|k| {
                        let xi = g.covector(k);
                        let sum: Complex64 =
                            (0..g.len()).map(|j| s.eval(&g.spatial_point(j), &xi)).sum();
                        sum * inv
                    })
                    .collect()
            }
        }
    }
}

impl LinearOperator for QuantizedSymbol {
    fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    fn apply(&self, u: &SpectralField) -> Result<SpectralField> {
        check_grid(&self.grid, u)?;
        match &self.form {
            Form::Multiplier(v) => Ok(u.map(|k, c| c * v[k])),
            Form::Separable { constant, terms } => {
                let mut acc = vec![Complex64::new(0.0, 0.0); self.grid.len()];
                for t in terms {
                    let w = u.map(|k, c| c * t.multiplier[k]);
                    let samples = transform_inverse(&w);
                    for ((a, c), s) in acc.iter_mut().zip(&t.coeff_samples).zip(&samples) {
                        *a += c * s;
                    }
                }
                let var = transform_forward(&self.grid, &acc)?;
                Ok(var.map(|k, c| c + constant[k] * u.coeffs()[k]))
            }
            Form::Dense(s) => {
                let g = &self.grid;
                let active: Vec<(Vec<f64>, Complex64)> = u
                    .coeffs()
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.norm_sqr() > 0.0)
                    .map(|(k, &c)| (g.covector(k), c))
                    .collect();
                let samples: Vec<Complex64> = (0..g.len())
                    .into_par_iter()
                    .map(|j| {
                        let x = g.spatial_point(j);
                        active
                            .iter()
                            .map(|(xi, c)| {
                                let phase: f64 = xi.iter().zip(&x).map(|(a, b)| a * b).sum();
                                s.eval(&x, xi) * c * Complex64::from_polar(1.0, phase)
                            })
                            .sum()
                    })
                    .collect();
                transform_forward(g, &samples)
            }
        }
    }

    fn multiplier(&self) -> Option<&[Complex64]> {
        match &self.form {
            Form::Multiplier(v) => Some(v),
            _ => None,
        }
    }
}

/// `Op(s)u` on the grid of `u`.
pub fn apply_psdo(s: &PolyhomSymbol, u: &SpectralField) -> Result<SpectralField> {
    QuantizedSymbol::compile(s, u.grid())?.apply(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psdo::HomogeneousComponent;
    use rand::SeedableRng;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    /// Independent quantization oracle: explicit double sum in spectral form,
    /// v̂(η) = N⁻¹ Σ_x Σ_ξ s(x, ξ) û(ξ) e^{i(ξ−η)·x}.
    fn dense_oracle(s: &PolyhomSymbol, u: &SpectralField) -> Vec<Complex64> {
        let g = u.grid();
        let n = g.len();
        (0..n)
            .map(|eta_k| {
                let eta = g.covector(eta_k);
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    let x = g.spatial_point(j);
                    for xi_k in 0..n {
                        let xi = g.covector(xi_k);
                        let ph: f64 = xi.iter().zip(&eta).zip(&x).map(|((a, b), c)| (a - b) * c).sum();
                        acc += s.eval(&x, &xi) * u.coeffs()[xi_k] * Complex64::from_polar(1.0, ph);
                    }
                }
                acc / n as f64
            })
            .collect()
    }

    #[test]
    fn laplacian_on_single_mode() {
        let g = TorusGrid::new(&[8, 8]).unwrap();
        let s = PolyhomSymbol::homogeneous(2, 2.0, "abs_xi^2").unwrap();
        let u = SpectralField::single_mode(&g, &[1, 2], one()).unwrap();
        let v = apply_psdo(&s, &u).unwrap();
        assert_eq!(v.coeff(&[1, 2]), Complex64::new(5.0, 0.0));
        assert!(v.sub(&u.scale(Complex64::new(5.0, 0.0))).unwrap().l2_norm() < 1e-14);
    }

    #[test]
    fn first_order_on_cosine() {
        let g = TorusGrid::new(&[16]).unwrap();
        let s = PolyhomSymbol::homogeneous(1, 1.0, "xi_1").unwrap();
        let half = Complex64::new(0.5, 0.0);
        let u = SpectralField::single_mode(&g, &[1], half)
            .unwrap()
            .add_scaled(one(), &SpectralField::single_mode(&g, &[-1], half).unwrap())
            .unwrap();
        let v = apply_psdo(&s, &u).unwrap();
        assert_eq!(v.coeff(&[1]), half);
        assert_eq!(v.coeff(&[-1]), -half);
    }

    #[test]
    fn separable_zeroth_order_against_dense_oracle() {
        let g = TorusGrid::new(&[16]).unwrap();
        let s = PolyhomSymbol::multiplication(1, "2+cos(x_1)").unwrap();
        let u = SpectralField::single_mode(&g, &[0], one()).unwrap();
        let q = QuantizedSymbol::compile(&s, &g).unwrap();
        assert!(q.is_separable());
        let v = q.apply(&u).unwrap();
        let oracle = dense_oracle(&s, &u);
        for (a, b) in v.coeffs().iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-13);
        }
        assert!((v.coeff(&[0]) - Complex64::new(2.0, 0.0)).norm() < 1e-14);
        assert!((v.coeff(&[1]) - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert!((v.coeff(&[-1]) - Complex64::new(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn separable_dense_and_oracle_agree() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let g = TorusGrid::new(&[8, 4]).unwrap();
        let u = SpectralField::random(&g, &mut rng, 1.0);
        let sep = PolyhomSymbol::new(
            2,
            vec![
                HomogeneousComponent::parse(2.0, "(2+sin(x_1))*xi_1^2 + cos(x_2)*abs_xi^2").unwrap(),
                HomogeneousComponent::parse(0.0, "-1 + 0.5*cos(x_1+x_2)").unwrap(),
            ],
        )
        .unwrap();
        let q = QuantizedSymbol::compile(&sep, &g).unwrap();
        assert!(q.is_separable());
        let v = q.apply(&u).unwrap();
        let oracle = dense_oracle(&sep, &u);
        let err: f64 = v.coeffs().iter().zip(&oracle).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");

        // sin(x_1 * xi_1) mixes the groups, so it takes the dense path.
        let dense = PolyhomSymbol::homogeneous(2, 0.0, "1 + 0.3*sin(x_1)*xi_1*xi_2 + 0.2*cos(x_1 + ang_xi)").unwrap();
        let q = QuantizedSymbol::compile(&dense, &g).unwrap();
        assert!(!q.is_separable() && !q.is_multiplier());
        let v = q.apply(&u).unwrap();
        let oracle = dense_oracle(&dense, &u);
        let err: f64 = v.coeffs().iter().zip(&oracle).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn capacity_and_dimension_errors() {
        let big = TorusGrid::new(&[256, 128]).unwrap();
        let dense = PolyhomSymbol::homogeneous(2, 0.0, "cos(x_1*xi_1)").unwrap();
        assert!(matches!(
            QuantizedSymbol::compile(&dense, &big),
            Err(Error::Capacity(_))
        ));
        let g1 = TorusGrid::new(&[8]).unwrap();
        let s2 = PolyhomSymbol::homogeneous(2, 2.0, "1").unwrap();
        assert!(matches!(
            apply_psdo(&s2, &SpectralField::zeros(&g1)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn mean_multiplier_of_separable() {
        let g = TorusGrid::new(&[16]).unwrap();
        let s = PolyhomSymbol::new(
            1,
            vec![
                HomogeneousComponent::parse(2.0, "abs_xi^2").unwrap(),
                HomogeneousComponent::parse(0.0, "2+cos(x_1)").unwrap(),
            ],
        )
        .unwrap();
        let q = QuantizedSymbol::compile(&s, &g).unwrap();
        let m = q.mean_multiplier();
        for k in 0..g.len() {
            let want = g.norm_sq(k) as f64 + 2.0;
            assert!((m[k].re - want).abs() < 1e-13 && m[k].im.abs() < 1e-13);
        }
    }
}
