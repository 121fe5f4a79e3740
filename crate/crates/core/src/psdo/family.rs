use std::sync::Arc;

use num_complex::Complex64;

use super::quantize::{check_grid, LinearOperator, QuantizedSymbol};
use super::symbol::PolyhomSymbol;
use crate::error::{Error, Result};
use crate::spectral::{SpectralField, TorusGrid};

const ORDER_SLACK: f64 = 1e-12;

/// The family `A(λ) = Σ_{j=0}^{q} λ^{q−j} A_j` with `λ`-weight `m`.
///
/// `A_0` is a multiplication operator and `ord A_j ≤ m·j`, so `A(λ)` has
/// order `mq` once `λ` is counted with weight `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterFamily {
    m: f64,
    q: usize,
    components: Vec<PolyhomSymbol>,
}

impl ParameterFamily {
    /// `components[j]` is `A_j`; `q = components.len() − 1 ≥ 1`.
    pub fn new(m: f64, components: Vec<PolyhomSymbol>) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::FamilyStructure(format!("weight m must be positive, got {m}")));
        }
        if components.len() < 2 {
            return Err(Error::FamilyStructure(
                "a family needs A_0 and at least one A_j (q >= 1)".into(),
            ));
        }
        let dim = components[0].dim();
        if components.iter().any(|c| c.dim() != dim) {
            return Err(Error::FamilyStructure("components live on different tori".into()));
        }
        if components[0].depends_on_xi() {
            return Err(Error::FamilyStructure(
                "A_0 must be a multiplication operator (no xi dependence)".into(),
            ));
        }
        for (j, c) in components.iter().enumerate() {
            let bound = m * j as f64;
            if c.order() > bound + ORDER_SLACK {
                return Err(Error::FamilyStructure(format!(
                    "ord A_{j} = {} exceeds m*j = {bound}",
                    c.order()
                )));
            }
        }
        Ok(ParameterFamily {
            m,
            q: components.len() - 1,
            components,
        })
    }

    /// `−Δ − λ` on `Tⁿ` (`m = 2`, `q = 1`).
    pub fn laplacian_resolvent(dim: usize) -> Self {
        ParameterFamily::new(
            2.0,
            vec![
                PolyhomSymbol::multiplication(dim, "-1").expect("constant"),
                PolyhomSymbol::homogeneous(dim, 2.0, "abs_xi^2").expect("laplacian"),
            ],
        )
        .expect("valid family")
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Weighted order `mq`.
    pub fn order(&self) -> f64 {
        self.m * self.q as f64
    }

    pub fn components(&self) -> &[PolyhomSymbol] {
        &self.components
    }

    pub fn depends_on_x(&self) -> bool {
        self.components.iter().any(|c| c.depends_on_x())
    }

    /// `[λ^q, λ^{q−1}, …, 1]` by repeated multiplication.
    pub fn lambda_powers(&self, lambda: Complex64) -> Vec<Complex64> {
        let mut w = vec![Complex64::new(1.0, 0.0); self.q + 1];
        for j in (0..self.q).rev() {
            w[j] = w[j + 1] * lambda;
        }
        w
    }

    /// Full symbol `σ(x, ξ, λ) = Σ_j λ^{q−j} a_j(x, ξ)`.
    pub fn full_symbol(&self, x: &[f64], xi: &[f64], lambda: Complex64) -> Complex64 {
        self.lambda_powers(lambda)
            .iter()
            .zip(&self.components)
            .map(|(w, c)| w * c.eval(x, xi))
            .sum()
    }

    /// `Σ_j λ^{q−j} a_{j,0}(x, ξ)`, where `a_{j,0}` is the degree-`mj`
    /// component of `A_j` (zero if `A_j` has lower order).
    pub fn principal_symbol_sum(&self, x: &[f64], xi: &[f64], lambda: Complex64) -> Result<Complex64> {
        if lambda.norm() == 0.0 && xi.iter().all(|v| *v == 0.0) {
            return Err(Error::Domain("principal sum is undefined at (xi, lambda) = 0".into()));
        }
        Ok(self.principal_unchecked(x, xi, lambda))
    }

    pub(crate) fn principal_unchecked(&self, x: &[f64], xi: &[f64], lambda: Complex64) -> Complex64 {
        let w = self.lambda_powers(lambda);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, c) in self.components.iter().enumerate() {
            if let Some(p) = c.component_of_degree(self.m * j as f64) {
                acc += w[j] * p.value(x, xi);
            }
        }
        acc
    }

    pub fn compile(&self, grid: &Arc<TorusGrid>) -> Result<CompiledFamily> {
        let parts = self
            .components
            .iter()
            .map(|c| QuantizedSymbol::compile(c, grid))
            .collect::<Result<Vec<_>>>()?;
        let means = parts.iter().map(|p| p.mean_multiplier()).collect();
        Ok(CompiledFamily {
            family: Arc::new(self.clone()),
            grid: grid.clone(),
            parts: Arc::new(parts),
            means: Arc::new(means),
        })
    }
}

/// A family with every `A_j` compiled for one grid; cheap to clone.
#[derive(Debug, Clone)]
pub struct CompiledFamily {
    family: Arc<ParameterFamily>,
    grid: Arc<TorusGrid>,
    parts: Arc<Vec<QuantizedSymbol>>,
    means: Arc<Vec<Vec<Complex64>>>,
}

impl CompiledFamily {
    pub fn family(&self) -> &ParameterFamily {
        &self.family
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn is_multiplier(&self) -> bool {
        self.parts.iter().all(|p| p.is_multiplier())
    }

    pub fn at(&self, lambda: Complex64) -> FamilyOperator {
        let weights = self.family.lambda_powers(lambda);
        let n = self.grid.len();
        let mut mean = vec![Complex64::new(0.0, 0.0); n];
        for (w, m) in weights.iter().zip(self.means.iter()) {
            if *w == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (a, b) in mean.iter_mut().zip(m) {
                *a += w * b;
            }
        }
        FamilyOperator {
            compiled: self.clone(),
            lambda,
            weights,
            exact_multiplier: self.is_multiplier(),
            mean,
        }
    }
}

/// `A(λ)` for a fixed `λ` on a fixed grid.
#[derive(Debug, Clone)]
pub struct FamilyOperator {
    compiled: CompiledFamily,
    lambda: Complex64,
    weights: Vec<Complex64>,
    exact_multiplier: bool,
    /// `Σ_j λ^{q−j}·mean_x a_j(x, ξ)`; the full symbol when exact.
    mean: Vec<Complex64>,
}

impl FamilyOperator {
    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn family(&self) -> &ParameterFamily {
        self.compiled.family()
    }

    /// The `x`-averaged symbol, used as preconditioner; equals the full
    /// symbol `σ(ξ, λ)` for multiplier families.
    pub fn mean_symbol(&self) -> &[Complex64] {
        &self.mean
    }

    pub fn is_multiplier(&self) -> bool {
        self.exact_multiplier
    }
}

impl LinearOperator for FamilyOperator {
    fn grid(&self) -> &Arc<TorusGrid> {
        &self.compiled.grid
    }

    fn apply(&self, u: &SpectralField) -> Result<SpectralField> {
        check_grid(&self.compiled.grid, u)?;
        if self.exact_multiplier {
            return Ok(u.map(|k, c| c * self.mean[k]));
        }
        let mut acc = SpectralField::zeros(u.grid());
        for (w, p) in self.weights.iter().zip(self.compiled.parts.iter()) {
            if *w == Complex64::new(0.0, 0.0) {
                continue;
            }
            acc = acc.add_scaled(*w, &p.apply(u)?)?;
        }
        Ok(acc)
    }

    fn multiplier(&self) -> Option<&[Complex64]> {
        self.exact_multiplier.then_some(&self.mean[..])
    }
}

/// `A(λ)` on `grid`.
pub fn assemble_family(
    fam: &ParameterFamily,
    grid: &Arc<TorusGrid>,
    lambda: Complex64,
) -> Result<FamilyOperator> {
    Ok(fam.compile(grid)?.at(lambda))
}
