use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::{Env, Expr, Var};
use crate::ro::pow_exact;

const ORDER_SLACK: f64 = 1e-12;

/// `|ξ|^d`, computed from `|ξ|²` for even integer `d` so lattice values stay
/// exact.
pub(crate) fn abs_pow(norm_sq: f64, degree: f64) -> f64 {
    if degree == 0.0 {
        1.0
    } else if degree.fract() == 0.0 && (degree / 2.0).fract() == 0.0 && degree.abs() <= 64.0 {
        norm_sq.powi((degree / 2.0) as i32)
    } else {
        pow_exact(norm_sq.sqrt(), degree)
    }
}

/// Smooth step: 0 for `s ≤ 0`, 1 for `s ≥ 1`, `C^∞` in between.
pub(crate) fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let f = |v: f64| (-1.0 / v).exp();
    let a = f(s);
    a / (a + f(1.0 - s))
}

fn check_axes(e: &Expr, dim: usize) -> Result<()> {
    if e.max_axis() > dim {
        return Err(Error::Dimension(format!(
            "expression refers to axis {} but the symbol lives on T^{dim}",
            e.max_axis()
        )));
    }
    if e.uses(Var::T) {
        return Err(Error::Domain("symbols may not use the scalar variable t".into()));
    }
    Ok(())
}

/// A positively homogeneous term `a(x, ξ)` of degree `d`.
///
/// The stored expression is evaluated on the unit cosphere, `a(x, ξ/|ξ|)`,
/// and extended by `|ξ|^d`, so e.g. `abs_xi^2` with degree 2 is `|ξ|²` and
/// `-xi_1` with degree 1 is `−ξ₁`. At `ξ = 0` the value is 0, except for a
/// `ξ`-free degree-0 term, which is the multiplication by `a(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousComponent {
    degree: f64,
    amplitude: Expr,
}

impl HomogeneousComponent {
    pub fn new(degree: f64, amplitude: Expr) -> Result<Self> {
        if !degree.is_finite() {
            return Err(Error::Domain("component degree must be finite".into()));
        }
        if amplitude.uses(Var::SmoothedXi) {
            return Err(Error::Domain(
                "smoothed_xi is not homogeneous; use it in a full symbol".into(),
            ));
        }
        if amplitude.uses(Var::T) {
            return Err(Error::Domain("symbols may not use the scalar variable t".into()));
        }
        Ok(HomogeneousComponent { degree, amplitude })
    }

    pub fn parse(degree: f64, src: &str) -> Result<Self> {
        HomogeneousComponent::new(degree, Expr::parse(src)?)
    }

    pub fn degree(&self) -> f64 {
        self.degree
    }

    pub fn amplitude(&self) -> &Expr {
        &self.amplitude
    }

    pub fn depends_on_x(&self) -> bool {
        self.amplitude.depends_on_x()
    }

    pub fn depends_on_xi(&self) -> bool {
        self.amplitude.depends_on_xi()
    }

    /// Homogeneous value `a(x, ξ/|ξ|)·|ξ|^d` (no taper).
    pub fn value(&self, x: &[f64], xi: &[f64]) -> Complex64 {
        let sq: f64 = xi.iter().map(|v| v * v).sum();
        if sq == 0.0 {
            if self.degree == 0.0 && !self.depends_on_xi() {
                return self.amplitude.eval(&Env::direction(x, xi));
            }
            return Complex64::new(0.0, 0.0);
        }
        let scale = abs_pow(sq, self.degree);
        if !self.depends_on_xi() {
            return self.amplitude.eval(&Env::direction(x, xi)) * scale;
        }
        let r = sq.sqrt();
        let omega: Vec<f64> = xi.iter().map(|v| v / r).collect();
        self.amplitude.eval(&Env::direction(x, &omega)) * scale
    }

    /// The declared expression evaluated at the actual covector. For a
    /// correctly declared degree this equals [`value`](Self::value).
    pub fn raw_value(&self, x: &[f64], xi: &[f64]) -> Complex64 {
        self.amplitude.eval(&Env::new(x, xi))
    }
}

/// A polyhomogeneous symbol `a ~ Σ_k a_{r−k}` on `Tⁿ`.
///
/// `components` carry strictly decreasing degrees, the first one being the
/// principal part. The operator symbol is the tapered sum of the components
/// unless a full symbol is supplied (e.g. `smoothed_xi^r`, whose expansion
/// starts with `abs_xi^r`); the components are then used only as its
/// principal expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyhomSymbol {
    dim: usize,
    order: f64,
    components: Vec<HomogeneousComponent>,
    full: Option<Expr>,
    cutoff_radius: f64,
}

impl PolyhomSymbol {
    pub fn new(dim: usize, components: Vec<HomogeneousComponent>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("symbol dimension must be at least 1".into()));
        }
        let first = components
            .first()
            .ok_or_else(|| Error::Domain("a symbol needs at least one component".into()))?;
        if components.windows(2).any(|w| w[1].degree >= w[0].degree) {
            return Err(Error::Domain("component degrees must strictly decrease".into()));
        }
        for c in &components {
            check_axes(&c.amplitude, dim)?;
        }
        Ok(PolyhomSymbol {
            dim,
            order: first.degree,
            components,
            full: None,
            cutoff_radius: 1.0,
        })
    }

    /// Single homogeneous component of the given degree.
    pub fn homogeneous(dim: usize, degree: f64, src: &str) -> Result<Self> {
        PolyhomSymbol::new(dim, vec![HomogeneousComponent::parse(degree, src)?])
    }

    /// Multiplication by a function of `x` (order 0, no `ξ`).
    pub fn multiplication(dim: usize, src: &str) -> Result<Self> {
        let c = HomogeneousComponent::parse(0.0, src)?;
        if c.depends_on_xi() {
            return Err(Error::FamilyStructure(format!(
                "multiplication operator may not depend on xi: {src}"
            )));
        }
        PolyhomSymbol::new(dim, vec![c])
    }

    /// Uses `full` as the operator symbol; the components remain its
    /// principal expansion.
    pub fn with_full(mut self, full: Expr) -> Result<Self> {
        check_axes(&full, self.dim)?;
        self.full = Some(full);
        Ok(self)
    }

    /// Declares the symbol in the larger class `Ψ^k`, `k ≥ order`.
    pub fn with_order(mut self, k: f64) -> Result<Self> {
        if k + ORDER_SLACK < self.components[0].degree {
            return Err(Error::Domain(format!(
                "declared order {k} below the principal degree {}",
                self.components[0].degree
            )));
        }
        self.order = k;
        Ok(self)
    }

    pub fn with_cutoff_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius >= 1.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("cutoff radius must be >= 1, got {radius}")));
        }
        self.cutoff_radius = radius;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn components(&self) -> &[HomogeneousComponent] {
        &self.components
    }

    pub fn full(&self) -> Option<&Expr> {
        self.full.as_ref()
    }

    pub fn cutoff_radius(&self) -> f64 {
        self.cutoff_radius
    }

    /// True if the symbol also belongs to `Ψ^k`.
    pub fn validates_as_order(&self, k: f64) -> bool {
        k + ORDER_SLACK >= self.order
    }

    pub fn depends_on_x(&self) -> bool {
        match &self.full {
            Some(f) => f.depends_on_x(),
            None => self.components.iter().any(|c| c.depends_on_x()),
        }
    }

    pub fn depends_on_xi(&self) -> bool {
        match &self.full {
            Some(f) => f.depends_on_xi(),
            None => self.components.iter().any(|c| c.depends_on_xi() || c.degree != 0.0),
        }
    }

    /// Taper factor for a component of degree `d` at `|ξ|`.
    pub(crate) fn taper(&self, degree: f64, abs_xi: f64) -> f64 {
        if degree > 0.0 {
            smooth_step(abs_xi / self.cutoff_radius)
        } else {
            1.0
        }
    }

    /// Full symbol `s(x, ξ)`.
    pub fn eval(&self, x: &[f64], xi: &[f64]) -> Complex64 {
        if let Some(f) = &self.full {
            return f.eval(&Env::new(x, xi));
        }
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.components
            .iter()
            .map(|c| c.value(x, xi) * self.taper(c.degree, r))
            .sum()
    }

    /// Homogeneous component of exact degree `d`, if declared.
    pub fn component_of_degree(&self, d: f64) -> Option<&HomogeneousComponent> {
        self.components.iter().find(|c| (c.degree - d).abs() <= ORDER_SLACK)
    }

    /// Principal symbol in `Ψ^{order}`: zero when the declared order exceeds
    /// the top degree.
    pub fn principal_value(&self, x: &[f64], xi: &[f64]) -> Complex64 {
        self.component_of_degree(self.order)
            .map_or(Complex64::new(0.0, 0.0), |c| c.value(x, xi))
    }

    /// Worst relative homogeneity defect `|a(x,2ξ) − 2^d a(x,ξ)| / |2^d a(x,ξ)|`
    /// of the declared expressions over the given samples with
    /// `|ξ| ≥ cutoff_radius`.
    pub fn homogeneity_defect(&self, samples: &[(Vec<f64>, Vec<f64>)]) -> f64 {
        let mut worst = 0.0f64;
        for c in &self.components {
            for (x, xi) in samples {
                let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
                if r < self.cutoff_radius {
                    continue;
                }
                let xi2: Vec<f64> = xi.iter().map(|v| 2.0 * v).collect();
                let want = c.raw_value(x, xi) * 2f64.powf(c.degree);
                let got = c.raw_value(x, &xi2);
                let scale = want.norm().max(f64::MIN_POSITIVE);
                if want.norm() == 0.0 && got.norm() == 0.0 {
                    continue;
                }
                worst = worst.max((got - want).norm() / scale);
            }
        }
        worst
    }
}

/// Evaluates the full symbol; free-function form of [`PolyhomSymbol::eval`].
pub fn eval_symbol(s: &PolyhomSymbol, x: &[f64], xi: &[f64]) -> Complex64 {
    s.eval(x, xi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let lap = PolyhomSymbol::homogeneous(2, 2.0, "abs_xi^2").unwrap();
        for x in [[0.0, 0.0], [1.0, 2.0]] {
            assert!((eval_symbol(&lap, &x, &[3.0, 4.0]).re - 25.0).abs() < 1e-12);
        }
        let d1 = PolyhomSymbol::homogeneous(2, 1.0, "xi_1").unwrap();
        assert_eq!(eval_symbol(&d1, &[0.0, 0.0], &[0.0, 5.0]), Complex64::new(0.0, 0.0));
        let var = PolyhomSymbol::homogeneous(2, 1.0, "(1+cos(x_1))*abs_xi").unwrap();
        assert!((eval_symbol(&var, &[0.0, 0.0], &[0.0, 2.0]).re - 4.0).abs() < 1e-15);
    }

    #[test]
    fn lattice_values_are_exact_for_even_degrees() {
        let lap = PolyhomSymbol::homogeneous(2, 2.0, "1").unwrap();
        assert_eq!(lap.eval(&[0.0, 0.0], &[1.0, 1.0]).re, 2.0);
        assert_eq!(lap.eval(&[0.0, 0.0], &[3.0, 4.0]).re, 25.0);
    }

    #[test]
    fn zero_frequency_convention() {
        let x = [0.3];
        let pos = HomogeneousComponent::parse(1.5, "2").unwrap();
        assert_eq!(pos.value(&x, &[0.0]), Complex64::new(0.0, 0.0));
        let mult = HomogeneousComponent::parse(0.0, "2+cos(x_1)").unwrap();
        assert!((mult.value(&x, &[0.0]).re - (2.0 + 0.3f64.cos())).abs() < 1e-15);
        let neg = HomogeneousComponent::parse(-1.0, "1").unwrap();
        assert_eq!(neg.value(&x, &[0.0]), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn taper_vanishes_at_origin_and_is_inactive_on_the_lattice() {
        let s = PolyhomSymbol::homogeneous(1, 1.0, "abs_xi").unwrap();
        assert_eq!(s.eval(&[0.0], &[0.0]).re, 0.0);
        assert_eq!(s.eval(&[0.0], &[1.0]).re, 1.0);
        let half = s.eval(&[0.0], &[0.5]).re;
        assert!(half > 0.0 && half < 0.5);
        assert_eq!(smooth_step(0.5), 0.5);
    }

    #[test]
    fn order_structure() {
        let s = PolyhomSymbol::new(
            2,
            vec![
                HomogeneousComponent::parse(2.0, "abs_xi^2").unwrap(),
                HomogeneousComponent::parse(1.0, "xi_1").unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(s.order(), 2.0);
        assert!(s.validates_as_order(2.0) && s.validates_as_order(3.5));
        assert!(!s.validates_as_order(1.9));
        let bigger = s.clone().with_order(3.0).unwrap();
        assert_eq!(bigger.principal_value(&[0.0, 0.0], &[1.0, 0.0]), Complex64::new(0.0, 0.0));
        assert!(s.clone().with_order(1.0).is_err());
        assert!(PolyhomSymbol::new(
            1,
            vec![
                HomogeneousComponent::parse(1.0, "1").unwrap(),
                HomogeneousComponent::parse(1.0, "1").unwrap()
            ]
        )
        .is_err());
        assert!(PolyhomSymbol::homogeneous(1, 1.0, "xi_2").is_err());
        assert!(HomogeneousComponent::parse(1.0, "smoothed_xi").is_err());
    }

    #[test]
    fn homogeneity_audit_catches_wrong_degree() {
        let samples: Vec<(Vec<f64>, Vec<f64>)> = (1..20)
            .map(|k| (vec![0.1 * k as f64, 0.2], vec![k as f64 * 0.7, 3.0 - 0.2 * k as f64]))
            .collect();
        let ok = PolyhomSymbol::homogeneous(2, 2.0, "(2+sin(x_1))*(xi_1^2 + 3*xi_2^2)").unwrap();
        assert!(ok.homogeneity_defect(&samples) < 1e-10);
        let bad = PolyhomSymbol::homogeneous(2, 1.0, "xi_1^2 + xi_2^2").unwrap();
        assert!(bad.homogeneity_defect(&samples) > 0.5);
    }

    #[test]
    fn full_symbol_overrides_components() {
        let s = PolyhomSymbol::homogeneous(1, 1.0, "abs_xi")
            .unwrap()
            .with_full(Expr::parse("smoothed_xi").unwrap())
            .unwrap();
        assert!((s.eval(&[0.0], &[3.0]).re - 10f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.eval(&[0.0], &[0.0]).re, 1.0);
        assert_eq!(s.principal_value(&[0.0], &[3.0]).re, 3.0);
    }
}
