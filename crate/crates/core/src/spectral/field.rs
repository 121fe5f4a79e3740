use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::TorusGrid;
use crate::error::{Error, Result};
use crate::sum::pairwise_sum;

/// A band-limited distribution on `Tⁿ`, stored by its Fourier coefficients.
///
/// Normalization is "unit mode": `e^{iξ·x}` has coefficient 1 at `ξ` and 0
/// elsewhere, and the normalized L₂ norm satisfies `‖u‖² = Σ |û(ξ)|²`.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<TorusGrid>,
    coeffs: Vec<Complex64>,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        *self.grid == *other.grid && self.coeffs == other.coeffs
    }
}

impl SpectralField {
    pub fn zeros(grid: &Arc<TorusGrid>) -> Self {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_coeffs(grid: &Arc<TorusGrid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs,
        })
    }

    /// `amp · e^{iξ·x}`.
    pub fn single_mode(grid: &Arc<TorusGrid>, freq: &[i64], amp: Complex64) -> Result<Self> {
        let k = grid.index_of(freq).ok_or_else(|| {
            Error::Dimension(format!("frequency {freq:?} is not on the lattice {:?}", grid.sizes()))
        })?;
        let mut f = SpectralField::zeros(grid);
        f.coeffs[k] = amp;
        Ok(f)
    }

    /// Random field with `û(ξ) = (g₁ + i g₂)/√2 · ⟨ξ⟩^{−decay}`, `gᵢ` standard
    /// normal.
    pub fn random<R: Rng + ?Sized>(grid: &Arc<TorusGrid>, rng: &mut R, decay: f64) -> Self {
        let coeffs = (0..grid.len())
            .map(|k| {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                Complex64::new(a, b) * (std::f64::consts::FRAC_1_SQRT_2 * grid.smoothed(k).powf(-decay))
            })
            .collect();
        SpectralField {
            grid: grid.clone(),
            coeffs,
        }
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at a lattice frequency (0 off-lattice).
    pub fn coeff(&self, freq: &[i64]) -> Complex64 {
        self.grid
            .index_of(freq)
            .map_or(Complex64::new(0.0, 0.0), |k| self.coeffs[k])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Frequency-wise map `û(ξ) ↦ f(flat, û(ξ))`.
    pub fn map(&self, mut f: impl FnMut(usize, Complex64) -> Complex64) -> Self {
        SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().enumerate().map(|(k, &c)| f(k, c)).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|_, c| c * s)
    }

    fn check_same_grid(&self, other: &SpectralField) -> Result<()> {
        if *self.grid != *other.grid {
            return Err(Error::Dimension(format!(
                "grid mismatch: {:?} vs {:?}",
                self.grid.sizes(),
                other.grid.sizes()
            )));
        }
        Ok(())
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, s: Complex64, other: &SpectralField) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(self.map(|k, c| c + s * other.coeffs[k]))
    }

    pub fn sub(&self, other: &SpectralField) -> Result<Self> {
        self.add_scaled(Complex64::new(-1.0, 0.0), other)
    }

    /// Normalized L₂ norm `(Σ |û|²)^½`.
    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.coeffs.iter().map(|c| c.norm_sqr()).collect();
        pairwise_sum(&sq).sqrt()
    }
}

fn fft_in_place(grid: &TorusGrid, data: &mut [Complex64], inverse: bool) {
    let sizes = grid.sizes();
    let strides = grid.strides();
    let total = grid.len();
    let mut buf = Vec::new();
    for axis in 0..grid.dim() {
        let n = sizes[axis];
        let s = strides[axis];
        let plan = grid.plan(axis, inverse);
        buf.resize(n, Complex64::new(0.0, 0.0));
        let block = n * s;
        for outer in (0..total).step_by(block) {
            for inner in 0..s {
                let base = outer + inner;
                for (k, b) in buf.iter_mut().enumerate() {
                    *b = data[base + k * s];
                }
                plan.process(&mut buf);
                for (k, b) in buf.iter().enumerate() {
                    data[base + k * s] = *b;
                }
            }
        }
    }
}

/// Spatial samples → Fourier coefficients, `û(ξ) = N⁻¹ Σ_x u(x) e^{−iξ·x}`.
pub fn transform_forward(grid: &Arc<TorusGrid>, samples: &[Complex64]) -> Result<SpectralField> {
    if samples.len() != grid.len() {
        return Err(Error::Dimension(format!(
            "sample array has {} entries, grid {:?} needs {}",
            samples.len(),
            grid.sizes(),
            grid.len()
        )));
    }
    let mut data = samples.to_vec();
    fft_in_place(grid, &mut data, false);
    let inv = 1.0 / grid.len() as f64;
    for c in &mut data {
        *c *= inv;
    }
    SpectralField::from_coeffs(grid, data)
}

/// Fourier coefficients → spatial samples, `u(x) = Σ_ξ û(ξ) e^{iξ·x}`.
pub fn transform_inverse(field: &SpectralField) -> Vec<Complex64> {
    let mut data = field.coeffs().to_vec();
    fft_in_place(field.grid(), &mut data, true);
    data
}
