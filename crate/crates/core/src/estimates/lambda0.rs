use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::constants::{apriori_constants, TrialCorpus};
use super::solve::{check_degeneracy, solve_with, SolveConfig};
use crate::ellipticity::{check_parameter_ellipticity, EllipticityConfig, Sector};
use crate::error::{Error, Result};
use crate::psdo::{CompiledFamily, ParameterFamily};
use crate::ro::RoFunction;
use crate::spectral::TorusGrid;

/// What "large enough `|λ|`" means. With both fields `None` only
/// invertibility of the discrete operator is required.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lambda0Criterion {
    /// Lower bound for `min_ξ |σ(ξ, λ)|` (multiplier families).
    pub delta: Option<f64>,
    /// Upper bound for both a priori constants.
    pub cap: Option<f64>,
}

impl Default for Lambda0Criterion {
    fn default() -> Self {
        Lambda0Criterion {
            delta: Some(1e-3),
            cap: Some(1e6),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lambda0Config {
    /// Rays spanning the sector (edges included); 1 for a ray.
    pub ray_count: usize,
    /// Relative width at which bisection stops.
    pub bisect_tol: f64,
    /// Sweep range and density for `|λ|`.
    pub r_min: f64,
    pub r_max: f64,
    pub points_per_decade: usize,
    pub ellipticity: EllipticityConfig,
    pub solve: SolveConfig,
    /// Seed and size of the random trial set used for non-multiplier
    /// families.
    pub seed: u64,
    pub random_trials: usize,
}

impl Default for Lambda0Config {
    fn default() -> Self {
        Lambda0Config {
            ray_count: 5,
            bisect_tol: 1e-3,
            r_min: 1e-6,
            r_max: 1e12,
            points_per_decade: 4,
            ellipticity: EllipticityConfig::default(),
            solve: SolveConfig::default(),
            seed: 0,
            random_trials: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayThreshold {
    pub arg: f64,
    pub lambda0: f64,
    /// Largest swept radius that failed, with the reason.
    pub last_failure: Option<(f64, String)>,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lambda0Report {
    /// `max` over rays.
    pub lambda0: f64,
    pub rays: Vec<RayThreshold>,
    pub ellipticity_margin: f64,
}

fn ray_args(sector: &Sector, count: usize) -> Vec<f64> {
    if sector.is_ray() || count <= 1 {
        return vec![sector.theta_min];
    }
    (0..count)
        .map(|k| sector.theta_min + sector.width() * k as f64 / (count - 1) as f64)
        .collect()
}

struct Probe<'a> {
    compiled: &'a CompiledFamily,
    phi: &'a RoFunction,
    criterion: Lambda0Criterion,
    cfg: &'a Lambda0Config,
    corpus: TrialCorpus,
}

impl Probe<'_> {
    /// `Ok(())` if `λ` satisfies the criterion, otherwise the reason.
    fn accepts(&self, lambda: Complex64) -> std::result::Result<(), String> {
        let op = self.compiled.at(lambda);
        let sym = op.mean_symbol();
        if let Err(e) = check_degeneracy(&op, sym) {
            return Err(e.to_string());
        }
        if op.is_multiplier() {
            if let Some(delta) = self.criterion.delta {
                let min = sym.iter().map(|s| s.norm()).fold(f64::INFINITY, f64::min);
                if min < delta {
                    return Err(format!("min |sigma| = {min:e} < delta = {delta:e}"));
                }
            }
        } else if let Some(f) = self.corpus.fields().first() {
            if let Err(e) = solve_with(&op, f, &self.cfg.solve) {
                return Err(e.to_string());
            }
        }
        if let Some(cap) = self.criterion.cap {
            let c = apriori_constants(&op, self.phi, &self.corpus).map_err(|e| e.to_string())?;
            let (up, low) = match (c.c_upper_exact, c.c_lower_exact) {
                (Some(u), Some(l)) => (u, l),
                _ => (c.c_upper, c.c_lower),
            };
            if !(up <= cap && low <= cap) {
                return Err(format!("constants ({up:e}, {low:e}) exceed cap {cap:e}"));
            }
        }
        Ok(())
    }
}

/// Smallest `|λ|` (per ray, then maximized) beyond which the criterion holds
/// at every swept radius. Refuses families that are not parameter-elliptic
/// in `sector`.
pub fn find_lambda0(
    fam: &ParameterFamily,
    grid: &Arc<TorusGrid>,
    sector: &Sector,
    phi: &RoFunction,
    criterion: Lambda0Criterion,
    cfg: &Lambda0Config,
) -> Result<Lambda0Report> {
    if !(cfg.r_min > 0.0 && cfg.r_max > cfg.r_min && cfg.bisect_tol > 0.0 && cfg.points_per_decade > 0) {
        return Err(Error::Domain("lambda0 sweep needs 0 < r_min < r_max and positive tolerances".into()));
    }
    let ell = check_parameter_ellipticity(fam, sector, &cfg.ellipticity)?;
    if !ell.is_elliptic {
        return Err(Error::Precondition(format!(
            "family is not parameter-elliptic in {sector}: margin {:e} at xi = {:?}, lambda = {}",
            ell.margin, ell.witness.xi, ell.witness.lambda
        )));
    }
    let compiled = fam.compile(grid)?;
    let corpus = if compiled.is_multiplier() {
        TrialCorpus::modes_only(grid)
    } else {
        TrialCorpus::random_only(grid, cfg.seed, cfg.random_trials.max(1))
    };
    let probe = Probe {
        compiled: &compiled,
        phi,
        criterion,
        cfg,
        corpus,
    };

    let decades = (cfg.r_max / cfg.r_min).log10();
    let steps = (decades * cfg.points_per_decade as f64).ceil() as usize;
    let radii: Vec<f64> = (0..=steps)
        .map(|k| cfg.r_min * (cfg.r_max / cfg.r_min).powf(k as f64 / steps as f64))
        .collect();

    let mut rays = Vec::new();
    for arg in ray_args(sector, cfg.ray_count) {
        let at = |r: f64| Complex64::from_polar(r, arg);
        let mut evaluations = 0;
        let mut last_fail: Option<(usize, String)> = None;
        for (i, &r) in radii.iter().enumerate() {
            evaluations += 1;
            if let Err(why) = probe.accepts(at(r)) {
                last_fail = Some((i, why));
            }
        }
        let (lambda0, last_failure) = match last_fail {
            None => (radii[0], None),
            Some((i, why)) if i + 1 == radii.len() => {
                return Err(Error::ThresholdNotFound(format!(
                    "ray arg {arg}: criterion still fails at |lambda| = {:e} ({why})",
                    radii[i]
                )));
            }
            Some((i, why)) => {
                let (mut lo, mut hi) = (radii[i], radii[i + 1]);
                while hi / lo - 1.0 > cfg.bisect_tol {
                    let mid = (lo * hi).sqrt();
                    evaluations += 1;
                    if probe.accepts(at(mid)).is_ok() {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                (hi, Some((radii[i], why)))
            }
        };
        rays.push(RayThreshold {
            arg,
            lambda0,
            last_failure,
            evaluations,
        });
    }
    Ok(Lambda0Report {
        lambda0: rays.iter().map(|r| r.lambda0).fold(0.0, f64::max),
        rays,
        ellipticity_margin: ell.margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ellipticity::SphereDensities;
    use std::f64::consts::PI;

    fn quick() -> Lambda0Config {
        Lambda0Config {
            ellipticity: EllipticityConfig {
                densities: SphereDensities { n_xi: 16, n_lambda: 8 },
                ..EllipticityConfig::default()
            },
            ..Lambda0Config::default()
        }
    }

    #[test]
    fn laplacian_threshold_on_the_left_ray() {
        // min_ξ |σ(ξ, −t)| = t, so δ = 0.5 forces t ≥ 0.5; the cap 10 only
        // needs (1 + t)/t ≤ 10.
        let g = TorusGrid::new(&[16, 16]).unwrap();
        let fam = ParameterFamily::laplacian_resolvent(2);
        let crit = Lambda0Criterion {
            delta: Some(0.5),
            cap: Some(10.0),
        };
        let r = find_lambda0(&fam, &g, &Sector::ray(PI), &RoFunction::one(), crit, &quick()).unwrap();
        assert!((r.lambda0 - 0.5).abs() <= 0.5 * 1e-3, "{}", r.lambda0);
        assert!(r.rays[0].last_failure.is_some());
    }

    #[test]
    fn invertibility_only_goes_to_the_floor() {
        let g = TorusGrid::new(&[16, 16]).unwrap();
        let fam = ParameterFamily::laplacian_resolvent(2);
        let crit = Lambda0Criterion { delta: None, cap: None };
        let cfg = quick();
        let r = find_lambda0(&fam, &g, &Sector::ray(PI), &RoFunction::one(), crit, &cfg).unwrap();
        assert_eq!(r.lambda0, cfg.r_min);
    }

    #[test]
    fn refuses_non_elliptic_sectors() {
        let g = TorusGrid::new(&[8, 8]).unwrap();
        let fam = ParameterFamily::laplacian_resolvent(2);
        let k = Sector::new(-0.1, 0.1).unwrap();
        let r = find_lambda0(&fam, &g, &k, &RoFunction::one(), Lambda0Criterion::default(), &quick());
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn unreachable_criterion() {
        let g = TorusGrid::new(&[8, 8]).unwrap();
        let fam = ParameterFamily::laplacian_resolvent(2);
        let crit = Lambda0Criterion {
            delta: None,
            cap: Some(0.5),
        };
        let r = find_lambda0(&fam, &g, &Sector::ray(PI), &RoFunction::one(), crit, &quick());
        assert!(matches!(r, Err(Error::ThresholdNotFound(_))));
    }
}
