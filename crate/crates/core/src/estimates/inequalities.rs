use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ro::RoFunction;
use crate::spectral::{hoermander_norm, param_norm, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slack {
    /// `rhs − lhs`.
    pub slack: f64,
    /// Size of the largest term, for relative comparisons.
    pub scale: f64,
}

impl Slack {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.slack / self.scale
        }
    }
}

/// `√2(‖u‖_{ηϱ^ε} + r^{ε+δ}‖u‖_{ηϱ^{−δ}}) − r^ε‖u‖_η`.
pub fn verify_interp_inequality(u: &SpectralField, eta: &RoFunction, r: f64, eps: f64, delta: f64) -> Result<Slack> {
    if u.is_zero() {
        return Err(Error::UndefinedResidual("interpolation inequality on the zero field".into()));
    }
    if !(r >= 0.0 && eps >= 0.0 && delta >= 0.0) {
        return Err(Error::Domain(format!("need r, eps, delta >= 0, got {r}, {eps}, {delta}")));
    }
    let lhs = r.powf(eps) * hoermander_norm(u, eta)?;
    let a = hoermander_norm(u, &eta.times_power(eps))?;
    let b = r.powf(eps + delta) * hoermander_norm(u, &eta.times_power(-delta))?;
    let rhs = std::f64::consts::SQRT_2 * (a + b);
    Ok(Slack {
        slack: rhs - lhs,
        scale: lhs.max(a).max(b),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    /// `‖u‖_{φϱ^{mq}, |λ|^q, mq}`.
    pub left: f64,
    /// `‖u‖_{φϱ^{mq}} + |λ|^q‖u‖_φ`.
    pub middle: f64,
    /// `√2 · left`.
    pub right: f64,
    /// `max(left − middle, middle − right, 0) / middle`.
    pub max_violation: f64,
}

/// Both sides of `‖u‖_{φϱ^{mq},|λ|^q,mq} ≤ ‖u‖_{φϱ^{mq}} + |λ|^q‖u‖_φ ≤
/// √2‖u‖_{φϱ^{mq},|λ|^q,mq}` for a family of weighted order `mq`.
pub fn verify_sandwich(u: &SpectralField, phi: &RoFunction, lambda: Complex64, m: f64, q: usize) -> Result<Sandwich> {
    if u.is_zero() {
        return Err(Error::UndefinedResidual("sandwich on the zero field".into()));
    }
    let mq = m * q as f64;
    let lq = lambda.norm().powi(q as i32);
    let top = phi.times_power(mq);
    let left = param_norm(u, &top, lq, mq)?;
    let middle = hoermander_norm(u, &top)? + lq * hoermander_norm(u, phi)?;
    let right = std::f64::consts::SQRT_2 * left;
    let max_violation = (left - middle).max(middle - right).max(0.0) / middle;
    Ok(Sandwich {
        left,
        middle,
        right,
        max_violation,
    })
}
