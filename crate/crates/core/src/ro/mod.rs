//! RO-varying weight functions `φ: [1, ∞) → (0, ∞)`.
//!
//! A function is RO-varying when `φ(λt)/φ(t)` stays within `[c⁻¹, c]` for
//! all `t ≥ 1` and `λ` in some interval `[1, a]`. Every such function has the
//! representation
//!
//! ```text
//! φ(t) = exp(β(t) + ∫₁ᵗ γ(τ)/τ dτ)
//! ```
//!
//! with bounded `β`, `γ`. Three concrete kinds are supported: closed-form
//! power/iterated-log products, a sampled `(β, γ)` pair and a tabulated
//! function. Every kind is evaluated in log-space so that ratios of huge
//! values stay finite.

mod indices;
mod interp_param;
mod sampled;

use std::sync::OnceLock;

pub use indices::{
    matuszewska_indices, verify_ro_condition, IndexEstimate, IndexGrids, RoCheck, RoCheckConfig,
};
pub use interp_param::{
    is_interpolation_parameter, make_interpolation_parameter, FunctionParam, InterpParam,
    PseudoconcavityCheck, PseudoconcavityConfig, DEFAULT_INDEX_MARGIN,
};
pub use sampled::{SampledFn, Tail};

use crate::error::{Error, Result};

/// The concrete representation behind an [`RoFunction`].
#[derive(Debug, Clone)]
pub enum RoKind {
    /// `t^s · Π_k ℓ_k(t)^{a_k}` with iterated logarithms
    /// `ℓ₁(t) = ln(e − 1 + t)`, `ℓ_{k+1}(t) = ln(e − 1 + ℓ_k(t))`.
    /// Each `ℓ_k ≥ 1` on `[1, ∞)`, so any real exponents are allowed.
    LogPower { s: f64, log_exponents: Vec<f64> },
    /// `exp(β(t) + ∫₁ᵗ γ(τ)/τ dτ)`.
    GammaIntegral { beta: SampledFn, gamma: SampledFn },
    /// Knots `(ln t_k, ln φ(t_k))`, interpolated linearly in log-log space.
    /// Constant below the first knot, `t^p` growth past the last.
    Tabulated {
        log_t: Vec<f64>,
        log_values: Vec<f64>,
        extrapolation_power: f64,
    },
}

impl RoKind {
    fn log_eval(&self, t: f64) -> Result<f64> {
        match self {
            RoKind::LogPower { s, log_exponents } => {
                let mut acc = s * t.ln();
                let mut ell = t;
                for a in log_exponents {
                    ell = (std::f64::consts::E - 1.0 + ell).ln();
                    acc += a * ell.ln();
                }
                Ok(acc)
            }
            RoKind::GammaIntegral { beta, gamma } => Ok(beta.value(t) + gamma.log_integral(t)),
            RoKind::Tabulated {
                log_t,
                log_values,
                extrapolation_power,
            } => {
                if log_t.is_empty() {
                    return Err(Error::InvalidFunction("tabulated function has no knots".into()));
                }
                let u = t.ln();
                let last = log_t.len() - 1;
                if u <= log_t[0] {
                    return Ok(log_values[0]);
                }
                if u >= log_t[last] {
                    return Ok(log_values[last] + extrapolation_power * (u - log_t[last]));
                }
                let k = log_t.partition_point(|&v| v <= u) - 1;
                let f = (u - log_t[k]) / (log_t[k + 1] - log_t[k]);
                Ok(log_values[k] + f * (log_values[k + 1] - log_values[k]))
            }
        }
    }
}

/// An RO-varying weight `c · t^r · φ_kind(t)`.
///
/// Index estimates are cached on first computation; the function value
/// itself never changes after construction.
#[derive(Debug, Clone)]
pub struct RoFunction {
    kind: RoKind,
    log_scale: f64,
    power: f64,
    indices: OnceLock<IndexEstimate>,
}

impl RoFunction {
    pub fn from_kind(kind: RoKind) -> Result<Self> {
        if let RoKind::Tabulated {
            log_t, log_values, ..
        } = &kind
        {
            if log_t.len() != log_values.len() {
                return Err(Error::InvalidFunction("knot arrays differ in length".into()));
            }
            if log_t.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidFunction("knots must be strictly increasing".into()));
            }
        }
        if let RoKind::LogPower { s, log_exponents } = &kind {
            if !s.is_finite() || log_exponents.iter().any(|a| !a.is_finite()) {
                return Err(Error::InvalidFunction("non-finite exponent".into()));
            }
        }
        Ok(RoFunction {
            kind,
            log_scale: 0.0,
            power: 0.0,
            indices: OnceLock::new(),
        })
    }

    /// `t^s`.
    pub fn power(s: f64) -> Self {
        RoFunction::log_power(s, Vec::new())
    }

    /// `φ ≡ 1`.
    pub fn one() -> Self {
        RoFunction::power(0.0)
    }

    pub fn log_power(s: f64, log_exponents: Vec<f64>) -> Self {
        RoFunction::from_kind(RoKind::LogPower { s, log_exponents })
            .expect("finite exponents required")
    }

    pub fn gamma_integral(beta: SampledFn, gamma: SampledFn) -> Self {
        RoFunction::from_kind(RoKind::GammaIntegral { beta, gamma }).expect("always valid")
    }

    /// Tabulated weight from `(t, φ(t))` knots with `t > 0`, `φ > 0`.
    pub fn tabulated(knots: &[(f64, f64)], extrapolation_power: f64) -> Result<Self> {
        let mut log_t = Vec::with_capacity(knots.len());
        let mut log_values = Vec::with_capacity(knots.len());
        for &(t, v) in knots {
            if !(t > 0.0 && v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidFunction(format!("bad knot ({t}, {v})")));
            }
            log_t.push(t.ln());
            log_values.push(v.ln());
        }
        RoFunction::tabulated_log(log_t, log_values, extrapolation_power)
    }

    /// Tabulated weight from knots already in log-log form; allows values
    /// far outside the `f64` range.
    pub fn tabulated_log(
        log_t: Vec<f64>,
        log_values: Vec<f64>,
        extrapolation_power: f64,
    ) -> Result<Self> {
        if log_t.is_empty() {
            return Err(Error::InvalidFunction("tabulated function has no knots".into()));
        }
        RoFunction::from_kind(RoKind::Tabulated {
            log_t,
            log_values,
            extrapolation_power,
        })
    }

    pub fn kind(&self) -> &RoKind {
        &self.kind
    }

    /// `c · φ` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("scale factor must be positive, got {c}")));
        }
        Ok(RoFunction {
            kind: self.kind.clone(),
            log_scale: self.log_scale + c.ln(),
            power: self.power,
            indices: OnceLock::new(),
        })
    }

    /// `φ · ϱ^r` where `ϱ(t) = t`.
    pub fn times_power(&self, r: f64) -> Self {
        RoFunction {
            kind: self.kind.clone(),
            log_scale: self.log_scale,
            power: self.power + r,
            indices: OnceLock::new(),
        }
    }

    /// `ln φ(t)` for `t ≥ 1`.
    pub fn log_eval(&self, t: f64) -> Result<f64> {
        if !(t >= 1.0) {
            return Err(Error::Domain(format!("RO functions are defined on [1, ∞), got t = {t}")));
        }
        let core = self.kind.log_eval(t)?;
        let shift = if self.power == 0.0 { 0.0 } else { self.power * t.ln() };
        Ok(self.log_scale + shift + core)
    }

    /// `φ(t)` for `t ≥ 1`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if let RoKind::LogPower { s, log_exponents } = &self.kind {
            // Closed form keeps pure powers exact: t^2 at t = 10 is 100.
            if log_exponents.is_empty() && self.log_scale == 0.0 && t >= 1.0 {
                return Ok(pow_exact(t, s + self.power));
            }
        }
        self.log_eval(t).map(f64::exp)
    }

    pub fn cached_indices(&self) -> Option<IndexEstimate> {
        self.indices.get().copied()
    }

    pub(crate) fn cache_indices(&self, est: IndexEstimate) {
        let _ = self.indices.set(est);
    }

    /// Cached indices, estimating them with the default grids on first use.
    pub fn indices(&self) -> Result<IndexEstimate> {
        match self.cached_indices() {
            Some(est) => Ok(est),
            None => matuszewska_indices(self, &IndexGrids::default()),
        }
    }
}

/// `t^s` with integer exponents computed by repeated multiplication.
pub(crate) fn pow_exact(t: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else if s.fract() == 0.0 && s.abs() <= 64.0 {
        t.powi(s as i32)
    } else {
        t.powf(s)
    }
}

/// Evaluates `φ(t)`; free-function form of [`RoFunction::eval`].
pub fn eval_ro(phi: &RoFunction, t: f64) -> Result<f64> {
    phi.eval(t)
}
