use serde::{Deserialize, Serialize};

use super::RoFunction;
use crate::error::{Error, Result};
use crate::grid::GeometricGrid;

/// Safety margin subtracted from (added to) the estimated lower (upper)
/// index when gating `s0` (`s1`).
pub const DEFAULT_INDEX_MARGIN: f64 = 0.1;

/// A positive function on `(0, ∞)` usable as an interpolation parameter.
pub trait FunctionParam {
    fn value(&self, t: f64) -> f64;
}

impl<F: Fn(f64) -> f64> FunctionParam for F {
    fn value(&self, t: f64) -> f64 {
        self(t)
    }
}

/// The interpolation parameter attached to an RO weight `φ` and a Sobolev
/// couple `s0 < s1`:
///
/// ```text
/// ψ(t) = t^{−s0/(s1−s0)} φ(t^{1/(s1−s0)})   for t ≥ 1
/// ψ(t) = φ(1)                               for 0 < t < 1
/// ```
///
/// so that `ψ(⟨ξ⟩^{s1−s0}) ⟨ξ⟩^{s0} = φ(⟨ξ⟩)`.
#[derive(Debug, Clone)]
pub struct InterpParam {
    phi: RoFunction,
    s0: f64,
    s1: f64,
}

impl InterpParam {
    /// Builds `ψ` without the index gate. Only ordering is enforced.
    pub fn new_unchecked(phi: RoFunction, s0: f64, s1: f64) -> Result<Self> {
        if !(s0 < s1) {
            return Err(Error::Ordering { s0, s1 });
        }
        Ok(InterpParam { phi, s0, s1 })
    }

    pub fn phi(&self) -> &RoFunction {
        &self.phi
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn s1(&self) -> f64 {
        self.s1
    }

    /// `ln ψ(t)`.
    pub fn log_value(&self, t: f64) -> f64 {
        if t < 1.0 {
            return self.phi.log_eval(1.0).unwrap_or(f64::NAN);
        }
        let d = self.s1 - self.s0;
        let lt = t.ln();
        let arg = t.powf(1.0 / d).max(1.0);
        -self.s0 / d * lt + self.phi.log_eval(arg).unwrap_or(f64::NAN)
    }
}

impl FunctionParam for InterpParam {
    fn value(&self, t: f64) -> f64 {
        if t < 1.0 {
            return self.phi.eval(1.0).unwrap_or(f64::NAN);
        }
        let d = self.s1 - self.s0;
        let arg = t.powf(1.0 / d).max(1.0);
        let head = if self.s0 == 0.0 { 1.0 } else { t.powf(-self.s0 / d) };
        head * self.phi.eval(arg).unwrap_or(f64::NAN)
    }
}

/// Builds `ψ` after checking `s0 < σ₀(φ) − margin` and `s1 > σ₁(φ) + margin`
/// against the cached (or freshly estimated) indices.
pub fn make_interpolation_parameter(
    phi: &RoFunction,
    s0: f64,
    s1: f64,
    margin: f64,
) -> Result<InterpParam> {
    if !(s0 < s1) {
        return Err(Error::Ordering { s0, s1 });
    }
    let est = phi.indices()?;
    if !(s0 < est.sigma0 - margin && s1 > est.sigma1 + margin) {
        return Err(Error::OutOfRange {
            s0,
            s1,
            sigma0: est.sigma0,
            sigma1: est.sigma1,
            margin,
        });
    }
    InterpParam::new_unchecked(phi.clone(), s0, s1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoconcavityConfig {
    /// Sample window `(b, T]`, `b ≫ 1`.
    pub grid: GeometricGrid,
    /// Largest admissible majorant-to-function ratio.
    pub max_defect: f64,
}

impl Default for PseudoconcavityConfig {
    fn default() -> Self {
        PseudoconcavityConfig {
            grid: GeometricGrid::decades(1, 12, 16),
            max_defect: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoconcavityCheck {
    pub ok: bool,
    /// `max_k M(t_k)/ψ(t_k)` for the least concave majorant `M` on the full
    /// window.
    pub concavity_defect: f64,
    /// Defect on the windows `(b, 10^d]`, one per decade.
    pub decade_defects: Vec<f64>,
}

/// Upper concave hull of points sorted by abscissa, evaluated back at the
/// sample abscissae.
fn concave_majorant(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut hull: Vec<usize> = Vec::with_capacity(ts.len());
    for k in 0..ts.len() {
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            let cross = (ts[a] - ts[o]) * (ys[k] - ys[o]) - (ys[a] - ys[o]) * (ts[k] - ts[o]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    let mut out = Vec::with_capacity(ts.len());
    let mut seg = 0;
    for k in 0..ts.len() {
        while seg + 1 < hull.len() && hull[seg + 1] < k {
            seg += 1;
        }
        let i = hull[seg];
        if i == k || seg + 1 == hull.len() {
            out.push(ys[k].max(ys[i]));
            continue;
        }
        let j = hull[seg + 1];
        let w = (ts[k] - ts[i]) / (ts[j] - ts[i]);
        out.push(ys[i] + w * (ys[j] - ys[i]));
    }
    out
}

fn defect(ts: &[f64], ys: &[f64]) -> f64 {
    concave_majorant(ts, ys)
        .iter()
        .zip(ys)
        .map(|(m, y)| m / y)
        .fold(1.0, f64::max)
}

/// Tests pseudoconcavity near `+∞`: the ratio between the least concave
/// majorant of the sampled `ψ` and `ψ` itself must stay below
/// `cfg.max_defect` on every decade-prefix of the window.
pub fn is_interpolation_parameter(
    psi: &dyn FunctionParam,
    cfg: &PseudoconcavityConfig,
) -> Result<PseudoconcavityCheck> {
    cfg.grid.validate()?;
    let ts = cfg.grid.points();
    let ys: Vec<f64> = ts.iter().map(|&t| psi.value(t)).collect();
    if let Some(bad) = ys.iter().position(|y| !(*y > 0.0 && y.is_finite())) {
        return Err(Error::Domain(format!(
            "interpolation parameter must be positive, got {} at t = {}",
            ys[bad], ts[bad]
        )));
    }
    let b = ts[0];
    let decades = ((ts[ts.len() - 1] / b).log10() - 1e-9).ceil().max(1.0) as usize;
    let decade_defects: Vec<f64> = (1..=decades)
        .map(|d| {
            let cut = b * 10f64.powi(d as i32) * (1.0 + 1e-9);
            let n = ts.partition_point(|&t| t <= cut);
            defect(&ts[..n], &ys[..n])
        })
        .collect();
    let concavity_defect = defect(&ts, &ys);
    let ok = concavity_defect.is_finite()
        && decade_defects
            .iter()
            .all(|d| d.is_finite() && *d <= cfg.max_defect)
        && concavity_defect <= cfg.max_defect;
    Ok(PseudoconcavityCheck {
        ok,
        concavity_defect,
        decade_defects,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_substitution() {
        for (phi, s0, s1, expo) in [
            (RoFunction::power(0.3), 0.0, 1.0, 0.3),
            (RoFunction::power(1.0), 0.0, 2.0, 0.5),
            (RoFunction::power(0.5), -1.0, 1.0, 0.75),
        ] {
            let psi = make_interpolation_parameter(&phi, s0, s1, DEFAULT_INDEX_MARGIN).unwrap();
            for t in [1.0f64, 4.0, 100.0, 12345.0] {
                let want = t.powf(expo);
                assert!((psi.value(t) - want).abs() < 1e-12 * want, "t = {t}");
            }
            assert_eq!(psi.value(0.25), phi.eval(1.0).unwrap());
        }
    }

    #[test]
    fn eq11_pointwise_oracle() {
        // φ = t^{1/2}, s0 = −1, s1 = 1: ψ(t) = t^{1/2} (t^{1/2})^{1/2}.
        let psi = make_interpolation_parameter(&RoFunction::power(0.5), -1.0, 1.0, 0.1).unwrap();
        for t in [1.0f64, 4.0, 100.0] {
            let oracle = t.powf(0.5) * t.powf(0.5).powf(0.5);
            assert!((psi.value(t) - oracle).abs() < 1e-12 * oracle);
            assert!((psi.log_value(t) - oracle.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn gate_errors() {
        let phi = RoFunction::power(1.0);
        assert!(matches!(
            make_interpolation_parameter(&phi, 2.0, 1.0, 0.1),
            Err(Error::Ordering { .. })
        ));
        match make_interpolation_parameter(&phi, 0.95, 2.0, 0.1) {
            Err(Error::OutOfRange { sigma0, sigma1, .. }) => {
                assert!((sigma0 - 1.0).abs() < 1e-9 && (sigma1 - 1.0).abs() < 1e-9)
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(make_interpolation_parameter(&phi, 0.0, 1.05, 0.1).is_err());
    }

    #[test]
    fn concave_power_has_unit_defect() {
        let r = is_interpolation_parameter(&|t: f64| t.sqrt(), &Default::default()).unwrap();
        assert!(r.ok);
        assert!((r.concavity_defect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn convex_square_defect_grows() {
        let r = is_interpolation_parameter(&|t: f64| t * t, &Default::default()).unwrap();
        assert!(!r.ok);
        // Oracle: on [b, T] the majorant is the chord; just past b its ratio
        // to t² is about T/t, which grows with T.
        assert!(r.decade_defects.windows(2).all(|w| w[1] > w[0]));
        assert!(r.concavity_defect > 1e9);
    }

    #[test]
    fn oscillating_linear_is_pseudoconcave() {
        let psi = |t: f64| t * (2.0 + t.ln().sin());
        let r = is_interpolation_parameter(&psi, &Default::default()).unwrap();
        assert!(r.ok);
        assert!(r.concavity_defect <= 3.0);
        // 2t is concave and within a factor of 3 of ψ, so the defect exceeds 1.
        assert!(r.concavity_defect > 1.0);
    }

    #[test]
    fn eq11_outputs_pass_the_gate() {
        let phi = RoFunction::log_power(1.0, vec![1.0]);
        let psi = make_interpolation_parameter(&phi, 0.0, 2.0, 0.1).unwrap();
        let r = is_interpolation_parameter(&psi, &Default::default()).unwrap();
        assert!(r.ok, "{r:?}");
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(is_interpolation_parameter(&|_t: f64| -1.0, &Default::default()).is_err());
    }
}
