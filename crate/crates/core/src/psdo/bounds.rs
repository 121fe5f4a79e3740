use serde::{Deserialize, Serialize};

use super::quantize::{LinearOperator, QuantizedSymbol};
use super::symbol::PolyhomSymbol;
use crate::error::{Error, Result};
use crate::ro::RoFunction;
use crate::spectral::{table_norm, weight_table, SpectralField};

/// Sampled and analytic bounds for `Op(s): H^{φϱ^r} → H^φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    /// `max ‖Op(s)u‖_φ / ‖u‖_{φϱ^r}` over the nonzero trials.
    pub sampled: f64,
    /// Number of nonzero trials used.
    pub trials: usize,
    /// `sup_ξ |s(ξ)| / ⟨ξ⟩^r` for `x`-independent symbols (exact norm).
    pub exact_multiplier: Option<f64>,
    /// Lattice bound `Σ_m Σ_k |ĉ_m(k)| S_φ(k) · sup_ξ |b_m(ξ)|/⟨ξ⟩^r` for
    /// separable symbols, with `S_φ(k) = sup_ξ φ(⟨ξ+k⟩)/φ(⟨ξ⟩)`.
    pub separable_bound: Option<f64>,
}

/// `sup_ξ φ(⟨ξ+k⟩)/φ(⟨ξ⟩)` over the lattice, with `ξ + k` wrapped.
fn shift_factor(w: &[f64], grid: &crate::spectral::TorusGrid, k: usize) -> f64 {
    let kf = grid.frequency(k);
    let mut worst = 0.0f64;
    for flat in 0..grid.len() {
        let f = grid.frequency(flat);
        let shifted: Vec<i64> = f
            .iter()
            .zip(&kf)
            .zip(grid.sizes())
            .map(|((a, b), &n)| {
                let n = n as i64;
                let mut s = (a + b).rem_euclid(n);
                if s > n / 2 {
                    s -= n;
                }
                s
            })
            .collect();
        let target = grid.index_of(&shifted).expect("wrapped frequency");
        worst = worst.max(w[grid.norm_sq(target) as usize] / w[grid.norm_sq(flat) as usize]);
    }
    worst
}

/// Estimates the norm of `Op(s)` from `H^{φϱ^r}` to `H^φ` on the trials'
/// grid.
pub fn operator_norm_estimate(
    s: &PolyhomSymbol,
    phi: &RoFunction,
    r: f64,
    trials: &[SpectralField],
) -> Result<NormEstimate> {
    let first = trials
        .iter()
        .find(|u| !u.is_zero())
        .ok_or_else(|| Error::EmptySample("no nonzero trial field".into()))?;
    let grid = first.grid().clone();
    let q = QuantizedSymbol::compile(s, &grid)?;
    let w = weight_table(first, phi)?;
    let wr = weight_table(first, &phi.times_power(r))?;

    let mut sampled = 0.0f64;
    let mut used = 0;
    for u in trials.iter().filter(|u| !u.is_zero()) {
        let v = q.apply(u)?;
        sampled = sampled.max(table_norm(&v, &w) / table_norm(u, &wr));
        used += 1;
    }

    let rho_r = |k: usize| wr[grid.norm_sq(k) as usize] / w[grid.norm_sq(k) as usize];
    let exact_multiplier = q.multiplier().map(|m| {
        m.iter()
            .enumerate()
            .map(|(k, v)| v.norm() / rho_r(k))
            .fold(0.0, f64::max)
    });

    let separable_bound = q.separable_parts().map(|(constant, terms)| {
        let sup_b = |b: &[num_complex::Complex64]| {
            b.iter()
                .enumerate()
                .map(|(k, v)| v.norm() / rho_r(k))
                .fold(0.0, f64::max)
        };
        let mut bound = sup_b(constant);
        let mut shifts = std::collections::HashMap::new();
        for t in terms {
            let cmax = t.coeff_hat.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let mut lattice = 0.0;
            for (k, c) in t.coeff_hat.iter().enumerate() {
                if c.norm() <= 1e-14 * cmax {
                    continue;
                }
                let sk = *shifts.entry(k).or_insert_with(|| shift_factor(&w, &grid, k));
                lattice += c.norm() * sk;
            }
            bound += lattice * sup_b(&t.multiplier);
        }
        bound
    });

    Ok(NormEstimate {
        sampled,
        trials: used,
        exact_multiplier,
        separable_bound,
    })
}
