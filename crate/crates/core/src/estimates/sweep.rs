use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::constants::{apriori_constants, TrialCorpus};
use super::solve::{solve_with, SolveConfig};
use crate::error::{Error, Result};
use crate::psdo::CompiledFamily;
use crate::ro::RoFunction;
use crate::spectral::SpectralField;

/// Points `(|λ|, arg λ)` of a sweep; every radius is used on every ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub args: Vec<f64>,
    pub radii: Vec<f64>,
}

impl SweepSpec {
    /// `start · 10^{k/per_decade}` for `k = 0..=decades·per_decade`.
    pub fn decades(args: Vec<f64>, start: f64, decades: usize, per_decade: usize) -> Result<Self> {
        if !(start > 0.0) || per_decade == 0 {
            return Err(Error::Domain("sweep needs a positive start radius and density".into()));
        }
        let radii = (0..=decades * per_decade)
            .map(|k| start * 10f64.powf(k as f64 / per_decade as f64))
            .collect();
        Ok(SweepSpec { args, radii })
    }

    pub fn points(&self) -> Vec<Complex64> {
        self.args
            .iter()
            .flat_map(|&a| self.radii.iter().map(move |&r| Complex64::from_polar(r, a)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub modulus: f64,
    pub arg: f64,
    pub c_upper: f64,
    pub c_lower: f64,
    pub c_upper_exact: Option<f64>,
    pub c_lower_exact: Option<f64>,
    /// Relative residual of the solve, `None` when `A(λ)` is singular on
    /// the lattice.
    pub residual: Option<f64>,
    /// Why the solve failed, if it did.
    pub failure: Option<String>,
    /// Kernel witness when `c_upper` is infinite.
    pub witness: Option<String>,
}

/// Two-sided constants and a solve at every sweep point. Points run in
/// parallel; rows come back in sweep order.
pub fn estimate_sweep(
    compiled: &CompiledFamily,
    phi: &RoFunction,
    spec: &SweepSpec,
    corpus: &TrialCorpus,
    rhs: &SpectralField,
    solve: &SolveConfig,
) -> Result<Vec<SweepRow>> {
    let pts: Vec<(f64, f64)> = spec
        .args
        .iter()
        .flat_map(|&a| spec.radii.iter().map(move |&r| (r, a)))
        .collect();
    pts.par_iter()
        .map(|&(r, a)| {
            let op = compiled.at(Complex64::from_polar(r, a));
            let c = apriori_constants(&op, phi, corpus)?;
            let (residual, failure) = match solve_with(&op, rhs, solve) {
                Ok(s) => (Some(s.residual), None),
                Err(e @ (Error::NearSingular { .. } | Error::Convergence { .. })) => (None, Some(e.to_string())),
                Err(e) => return Err(e),
            };
            Ok(SweepRow {
                modulus: r,
                arg: a,
                c_upper: c.c_upper,
                c_lower: c.c_lower,
                c_upper_exact: c.c_upper_exact,
                c_lower_exact: c.c_lower_exact,
                residual,
                failure,
                witness: c.upper_infinite.then_some(c.upper_witness),
            })
        })
        .collect()
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else if v > 0.0 {
        "inf".into()
    } else {
        "nan".into()
    }
}

/// CSV with header `modulus,arg,c_upper,c_lower,residual`; exact values
/// replace sampled ones when available, a missing residual is empty.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("modulus,arg,c_upper,c_lower,residual\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            num(r.modulus),
            num(r.arg),
            num(r.c_upper_exact.unwrap_or(r.c_upper)),
            num(r.c_lower_exact.unwrap_or(r.c_lower)),
            r.residual.map(num).unwrap_or_default()
        ));
    }
    out
}

/// Least-squares slope of `ln c` against `ln |λ|` over the rows whose
/// modulus lies in `[lo, hi]`.
pub fn log_slope(rows: &[(f64, f64)], lo: f64, hi: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(r, c)| *r >= lo && *r <= hi && *c > 0.0 && c.is_finite())
        .map(|(r, c)| (r.ln(), c.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}
