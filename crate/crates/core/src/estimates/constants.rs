use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::psdo::{FamilyOperator, LinearOperator};
use crate::ro::RoFunction;
use crate::spectral::{table_norm, weight_table, SpectralField, TorusGrid};

/// Random fields in the standard corpus.
pub const RANDOM_TRIALS: usize = 64;
/// Spectral decay exponent of the random trials.
pub const RANDOM_DECAY: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Trial {
    Mode(usize),
    Field(usize),
}

/// Trial fields for sampling operator constants: optionally every single
/// mode of the lattice (produced lazily) plus explicit fields.
#[derive(Debug, Clone)]
pub struct TrialCorpus {
    grid: Arc<TorusGrid>,
    modes: bool,
    fields: Vec<SpectralField>,
}

impl TrialCorpus {
    /// All single modes plus [`RANDOM_TRIALS`] seeded random fields.
    pub fn standard(grid: &Arc<TorusGrid>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fields = (0..RANDOM_TRIALS)
            .map(|_| SpectralField::random(grid, &mut rng, RANDOM_DECAY))
            .collect();
        TrialCorpus {
            grid: grid.clone(),
            modes: true,
            fields,
        }
    }

    /// Every single mode and nothing else; exact extremizers for
    /// multiplier families.
    pub fn modes_only(grid: &Arc<TorusGrid>) -> Self {
        TrialCorpus {
            grid: grid.clone(),
            modes: true,
            fields: Vec::new(),
        }
    }

    /// Only the seeded random fields.
    pub fn random_only(grid: &Arc<TorusGrid>, seed: u64, count: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fields = (0..count)
            .map(|_| SpectralField::random(grid, &mut rng, RANDOM_DECAY))
            .collect();
        TrialCorpus {
            grid: grid.clone(),
            modes: false,
            fields,
        }
    }

    pub fn from_fields(grid: &Arc<TorusGrid>, fields: Vec<SpectralField>) -> Result<Self> {
        if let Some(f) = fields.iter().find(|f| **f.grid() != **grid) {
            return Err(Error::Dimension(format!(
                "trial on grid {:?}, corpus grid {:?}",
                f.grid().sizes(),
                grid.sizes()
            )));
        }
        Ok(TrialCorpus {
            grid: grid.clone(),
            modes: false,
            fields,
        })
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.fields.len() + if self.modes { self.grid.len() } else { 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn fields(&self) -> &[SpectralField] {
        &self.fields
    }

    fn trials(&self) -> impl Iterator<Item = Trial> + '_ {
        let modes = if self.modes { self.grid.len() } else { 0 };
        (0..modes).map(Trial::Mode).chain((0..self.fields.len()).map(Trial::Field))
    }

    fn describe(&self, t: Trial) -> String {
        match t {
            Trial::Mode(k) => format!("single mode {:?}", self.grid.frequency(k)),
            Trial::Field(i) => format!("random field #{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AprioriConstants {
    /// `max (‖u‖_{φϱ^{mq}} + |λ|^q‖u‖_φ) / ‖A(λ)u‖_φ` over the trials.
    pub c_upper: f64,
    /// `max ‖A(λ)u‖_φ / (‖u‖_{φϱ^{mq}} + |λ|^q‖u‖_φ)` over the trials.
    pub c_lower: f64,
    /// Some nonzero trial had `A(λ)u = 0`.
    pub upper_infinite: bool,
    /// The trial realizing `c_upper` (the kernel element when infinite).
    pub upper_witness: String,
    /// Per-frequency values, for multiplier families.
    pub c_upper_exact: Option<f64>,
    pub c_lower_exact: Option<f64>,
    /// Frequency realizing `c_upper_exact`.
    pub exact_witness: Option<Vec<i64>>,
    pub trials: usize,
}

/// Two-sided constants of `A(λ)` relative to `φ`.
pub fn apriori_constants(op: &FamilyOperator, phi: &RoFunction, corpus: &TrialCorpus) -> Result<AprioriConstants> {
    if **corpus.grid() != **op.grid() {
        return Err(Error::Dimension("trial corpus and operator grids differ".into()));
    }
    let grid = op.grid();
    let fam = op.family();
    let lq = op.lambda().norm().powi(fam.q() as i32);
    let probe = SpectralField::zeros(grid);
    let w = weight_table(&probe, phi)?;
    let wm = weight_table(&probe, &phi.times_power(fam.order()))?;
    let ns = grid.norm_sq_all();

    let mut c_upper = 0.0f64;
    let mut c_lower = 0.0f64;
    let mut upper_infinite = false;
    let mut witness = None;
    let mut used = 0;
    for t in corpus.trials() {
        let (middle, image) = match t {
            Trial::Mode(k) => {
                let n = ns[k] as usize;
                let middle = wm[n] + lq * w[n];
                let image = match op.multiplier() {
                    Some(m) => m[k].norm() * w[n],
                    None => {
                        let u = SpectralField::single_mode(grid, &grid.frequency(k), Complex64::new(1.0, 0.0))?;
                        table_norm(&op.apply(&u)?, &w)
                    }
                };
                (middle, image)
            }
            Trial::Field(i) => {
                let u = &corpus.fields[i];
                if u.is_zero() {
                    continue;
                }
                let middle = table_norm(u, &wm) + lq * table_norm(u, &w);
                (middle, table_norm(&op.apply(u)?, &w))
            }
        };
        used += 1;
        c_lower = c_lower.max(image / middle);
        if image == 0.0 {
            if !upper_infinite {
                upper_infinite = true;
                witness = Some(t);
            }
            continue;
        }
        let ratio = middle / image;
        if !upper_infinite && ratio > c_upper {
            c_upper = ratio;
            witness = Some(t);
        }
    }
    if used == 0 {
        return Err(Error::EmptySample("no nonzero trial field".into()));
    }
    if upper_infinite {
        c_upper = f64::INFINITY;
    }

    let (c_upper_exact, c_lower_exact, exact_witness) = match op.multiplier() {
        Some(m) => {
            let mut up = 0.0f64;
            let mut low = 0.0f64;
            let mut arg = 0;
            for (k, s) in m.iter().enumerate() {
                let n = ns[k] as usize;
                let middle = wm[n] + lq * w[n];
                let image = w[n] * s.norm();
                let r = middle / image;
                if r > up || (r.is_infinite() && up.is_finite()) {
                    up = r;
                    arg = k;
                }
                low = low.max(image / middle);
            }
            (Some(up), Some(low), Some(grid.frequency(arg)))
        }
        None => (None, None, None),
    };

    Ok(AprioriConstants {
        c_upper,
        c_lower,
        upper_infinite,
        upper_witness: witness.map(|t| corpus.describe(t)).unwrap_or_default(),
        c_upper_exact,
        c_lower_exact,
        exact_witness,
        trials: used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psdo::ParameterFamily;

    fn lap_at(g: &Arc<TorusGrid>, lambda: f64) -> FamilyOperator {
        ParameterFamily::laplacian_resolvent(g.dim())
            .compile(g)
            .unwrap()
            .at(Complex64::new(lambda, 0.0))
    }

    #[test]
    fn upper_constant_at_minus_one() {
        // Oracle: (⟨ξ⟩² + 1)/(|ξ|² + 1) peaks at ξ = 0 with value 2.
        let g = TorusGrid::new(&[16, 16]).unwrap();
        let c = apriori_constants(&lap_at(&g, -1.0), &RoFunction::one(), &TrialCorpus::standard(&g, 1)).unwrap();
        assert_eq!(c.c_upper_exact, Some(2.0));
        assert_eq!(c.exact_witness, Some(vec![0, 0]));
        assert_eq!(c.c_upper, 2.0);
        assert!(!c.upper_infinite);
        assert_eq!(c.trials, 256 + RANDOM_TRIALS);
    }

    #[test]
    fn upper_constant_tends_to_one_along_the_ray() {
        let g = TorusGrid::new(&[16, 16]).unwrap();
        let corpus = TrialCorpus::random_only(&g, 0, 4);
        let mut last = f64::INFINITY;
        for r in [1e2, 1e4, 1e6] {
            let c = apriori_constants(&lap_at(&g, -r), &RoFunction::power(1.0), &corpus).unwrap();
            let up = c.c_upper_exact.unwrap();
            assert!((up - (1.0 + r) / r).abs() < 1e-13);
            assert!(up < last);
            last = up;
        }
        assert!(last - 1.0 < 1e-5);
    }

    #[test]
    fn single_mode_reciprocity() {
        let g = TorusGrid::new(&[8, 8]).unwrap();
        let u = SpectralField::single_mode(&g, &[2, 1], Complex64::new(0.0, 3.0)).unwrap();
        let corpus = TrialCorpus::from_fields(&g, vec![u]).unwrap();
        let c = apriori_constants(&lap_at(&g, -2.5), &RoFunction::power(0.5), &corpus).unwrap();
        assert!((c.c_upper * c.c_lower - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kernel_element_is_reported() {
        let g = TorusGrid::new(&[8, 8]).unwrap();
        let c = apriori_constants(&lap_at(&g, 2.0), &RoFunction::one(), &TrialCorpus::standard(&g, 0)).unwrap();
        assert!(c.upper_infinite && c.c_upper.is_infinite());
        assert!(c.upper_witness.starts_with("single mode"));
        assert_eq!(c.c_upper_exact, Some(f64::INFINITY));
        let w = c.exact_witness.unwrap();
        assert_eq!(w[0] * w[0] + w[1] * w[1], 2);
        assert!(c.c_lower <= 1.0);
    }
}
