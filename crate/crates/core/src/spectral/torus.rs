use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Frequency lattice of a band-limited field on `Tⁿ = (ℝ/2πℤ)ⁿ`.
///
/// Axis `i` carries `N_i` (even) frequencies `−N_i/2 < ξ_i ≤ N_i/2`, stored
/// in FFT order: index `k` holds frequency `k` for `k ≤ N_i/2` and `k − N_i`
/// otherwise. Flat indices are row-major (last axis fastest); the spatial
/// samples use the same layout with `x_i = 2π k / N_i`.
pub struct TorusGrid {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
    norm_sq: Vec<u64>,
    max_norm_sq: u64,
    plans: Vec<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid").field("sizes", &self.sizes).finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.sizes == other.sizes
    }
}

pub(crate) fn axis_frequency(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

impl TorusGrid {
    pub fn new(sizes: &[usize]) -> Result<Arc<TorusGrid>> {
        if sizes.is_empty() {
            return Err(Error::Dimension("torus dimension must be at least 1".into()));
        }
        if let Some(&bad) = sizes.iter().find(|&&n| n < 2 || n % 2 != 0) {
            return Err(Error::Dimension(format!(
                "axis sizes must be even and at least 2, got {bad}"
            )));
        }
        let len = sizes
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::Capacity("lattice size overflows".into()))?;
        let mut strides = vec![1; sizes.len()];
        for i in (0..sizes.len() - 1).rev() {
            strides[i] = strides[i + 1] * sizes[i + 1];
        }
        let mut norm_sq = vec![0u64; len];
        for (flat, slot) in norm_sq.iter_mut().enumerate() {
            let mut acc = 0u64;
            for (i, &n) in sizes.iter().enumerate() {
                let f = axis_frequency((flat / strides[i]) % n, n);
                acc += (f * f) as u64;
            }
            *slot = acc;
        }
        let max_norm_sq = sizes.iter().map(|&n| ((n / 2) * (n / 2)) as u64).sum();
        let mut planner = FftPlanner::new();
        let plans = sizes
            .iter()
            .map(|&n| (planner.plan_fft_forward(n), planner.plan_fft_inverse(n)))
            .collect();
        Ok(Arc::new(TorusGrid {
            sizes: sizes.to_vec(),
            strides,
            len,
            norm_sq,
            max_norm_sq,
            plans,
        }))
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Lattice cardinality `Π N_i`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub(crate) fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub(crate) fn plan(&self, axis: usize, inverse: bool) -> &Arc<dyn Fft<f64>> {
        if inverse {
            &self.plans[axis].1
        } else {
            &self.plans[axis].0
        }
    }

    pub fn frequency(&self, flat: usize) -> Vec<i64> {
        self.sizes
            .iter()
            .zip(&self.strides)
            .map(|(&n, &s)| axis_frequency((flat / s) % n, n))
            .collect()
    }

    /// Frequency as a real covector.
    pub fn covector(&self, flat: usize) -> Vec<f64> {
        self.frequency(flat).into_iter().map(|f| f as f64).collect()
    }

    pub fn index_of(&self, freq: &[i64]) -> Option<usize> {
        if freq.len() != self.dim() {
            return None;
        }
        let mut flat = 0;
        for ((&f, &n), &s) in freq.iter().zip(&self.sizes).zip(&self.strides) {
            let half = (n / 2) as i64;
            if f <= -half || f > half {
                return None;
            }
            let k = if f >= 0 { f as usize } else { (f + n as i64) as usize };
            flat += k * s;
        }
        Some(flat)
    }

    /// `|ξ|²` at a flat index.
    pub fn norm_sq(&self, flat: usize) -> u64 {
        self.norm_sq[flat]
    }

    pub fn norm_sq_all(&self) -> &[u64] {
        &self.norm_sq
    }

    pub fn max_norm_sq(&self) -> u64 {
        self.max_norm_sq
    }

    /// `⟨ξ⟩ = (1 + |ξ|²)^½` at a flat index.
    pub fn smoothed(&self, flat: usize) -> f64 {
        (1.0 + self.norm_sq[flat] as f64).sqrt()
    }

    /// Spatial sample point `x` for a flat index.
    pub fn spatial_point(&self, flat: usize) -> Vec<f64> {
        self.sizes
            .iter()
            .zip(&self.strides)
            .map(|(&n, &s)| 2.0 * std::f64::consts::PI * ((flat / s) % n) as f64 / n as f64)
            .collect()
    }

    /// Evaluates a radial function `f(⟨ξ⟩)` once per value of the integer
    /// `|ξ|²`; entry `k` holds `f((1 + k)^½)`.
    pub fn radial_table<E>(&self, mut f: impl FnMut(f64) -> std::result::Result<f64, E>) -> std::result::Result<Vec<f64>, E> {
        (0..=self.max_norm_sq)
            .map(|k| f((1.0 + k as f64).sqrt()))
            .collect()
    }
}
