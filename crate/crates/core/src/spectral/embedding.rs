use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::GeometricGrid;
use crate::ro::RoFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    /// Largest relative growth of the running sup over the last decade for
    /// the ratio to count as bounded.
    pub bounded_growth: f64,
    /// Ratio at the end of the grid below which it counts as tending to 0.
    pub compact_threshold: f64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            bounded_growth: 0.01,
            compact_threshold: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    /// `H^{φ₁} ↪ H^φ` continuously.
    pub continuous: bool,
    /// The embedding is also compact.
    pub compact: bool,
    /// Sampled `sup φ/φ₁` over the whole grid.
    pub norm_bound: f64,
    /// Max of `φ/φ₁` within each decade of the grid.
    pub decade_max: Vec<f64>,
}

/// Classifies the embedding `H^{φ₁}(Tⁿ) ↪ H^φ(Tⁿ)` from sampled values of
/// `φ/φ₁`: bounded near `+∞` means continuous, tending to 0 means compact.
pub fn embedding_check(
    phi: &RoFunction,
    phi1: &RoFunction,
    t_grid: &GeometricGrid,
    cfg: &EmbeddingConfig,
) -> Result<EmbeddingReport> {
    t_grid.validate()?;
    let ts = t_grid.points();
    let t0 = ts[0];
    let mut decade_max: Vec<f64> = Vec::new();
    let mut last_ratio = f64::NAN;
    for &t in &ts {
        let ratio = (phi.log_eval(t)? - phi1.log_eval(t)?).exp();
        let d = ((t / t0).log10() - 1e-9).ceil().max(1.0) as usize - 1;
        if d >= decade_max.len() {
            decade_max.resize(d + 1, 0.0);
        }
        decade_max[d] = decade_max[d].max(ratio);
        last_ratio = ratio;
    }
    let norm_bound = decade_max.iter().copied().fold(0.0, f64::max);
    let running: Vec<f64> = decade_max
        .iter()
        .scan(0.0f64, |acc, &m| {
            *acc = acc.max(m);
            Some(*acc)
        })
        .collect();
    let continuous = norm_bound.is_finite()
        && match running.len() {
            0 | 1 => true,
            n => running[n - 1] <= running[n - 2] * (1.0 + cfg.bounded_growth),
        };
    let decreasing = decade_max.windows(2).all(|w| w[1] < w[0]);
    let compact = continuous && decreasing && last_ratio < cfg.compact_threshold;
    Ok(EmbeddingReport {
        continuous,
        compact,
        norm_bound,
        decade_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(a: f64, b: f64) -> EmbeddingReport {
        embedding_check(
            &RoFunction::power(a),
            &RoFunction::power(b),
            &GeometricGrid::decades(0, 8, 16),
            &Default::default(),
        )
        .unwrap()
    }

    #[test]
    fn power_pairs() {
        let r = check(1.0, 2.0);
        assert!(r.continuous && r.compact);
        assert!((r.norm_bound - 1.0).abs() < 1e-15);
        let r = check(1.0, 1.0);
        assert!(r.continuous && !r.compact);
        let r = check(2.0, 1.0);
        assert!(!r.continuous && !r.compact);
        assert_eq!(r.decade_max.len(), 8);
    }

    #[test]
    fn log_factor_is_compact_but_slowly() {
        // t / (t·ln(e−1+t)) → 0 but only reaches ~0.054 by 10⁸.
        let r = embedding_check(
            &RoFunction::power(1.0),
            &RoFunction::log_power(1.0, vec![1.0]),
            &GeometricGrid::decades(0, 8, 16),
            &Default::default(),
        )
        .unwrap();
        assert!(r.continuous);
        assert!(!r.compact);
    }
}
