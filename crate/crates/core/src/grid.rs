//! Geometric sampling grids on `[start, end]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometrically spaced points from `start` to `end` (both included).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricGrid {
    pub start: f64,
    pub end: f64,
    pub points_per_decade: usize,
}

impl GeometricGrid {
    pub const fn new(start: f64, end: f64, points_per_decade: usize) -> Self {
        GeometricGrid {
            start,
            end,
            points_per_decade,
        }
    }

    /// Decades `10^lo ..= 10^hi`.
    pub fn decades(lo: i32, hi: i32, points_per_decade: usize) -> Self {
        GeometricGrid::new(10f64.powi(lo), 10f64.powi(hi), points_per_decade)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.start > 0.0
            && self.end >= self.start
            && self.end.is_finite()
            && self.points_per_decade > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid geometric grid {self:?}")))
        }
    }

    pub fn points(&self) -> Vec<f64> {
        if self.end == self.start {
            return vec![self.start];
        }
        let span = (self.end / self.start).log10();
        let n = ((span * self.points_per_decade as f64).ceil() as usize).max(1);
        let mut pts: Vec<f64> = (0..=n)
            .map(|k| self.start * 10f64.powf(span * k as f64 / n as f64))
            .collect();
        pts[0] = self.start;
        pts[n] = self.end;
        pts
    }
}
