use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nelder_mead::{minimize, Options};
use super::sphere::{direction_from_angles, sample_parameter_sphere, unit_directions, SphereDensities, SpherePoint};
use super::Sector;
use crate::error::Result;
use crate::psdo::{ParameterFamily, PolyhomSymbol};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticityConfig {
    pub densities: SphereDensities,
    /// Points per axis of the `x`-grid (ignored for `x`-independent
    /// families).
    pub x_density: usize,
    /// `is_elliptic` iff `margin > threshold`.
    pub threshold: f64,
    /// Polish the sampled minimum with a local search.
    pub refine: bool,
}

impl Default for EllipticityConfig {
    fn default() -> Self {
        EllipticityConfig {
            densities: SphereDensities::default(),
            x_density: 16,
            threshold: 1e-6,
            refine: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub lambda: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingSpec {
    pub n_xi: usize,
    pub n_lambda: usize,
    pub directions: usize,
    pub args: usize,
    pub x_points: usize,
    pub sphere_points: usize,
    pub refined: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayMinimum {
    pub arg: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub is_elliptic: bool,
    /// Sampled `min |Σ_j λ^{q−j} a_{j,0}(x, ξ)|` over the weighted sphere.
    pub margin: f64,
    pub threshold: f64,
    pub witness: Witness,
    pub sampling: SamplingSpec,
    /// Minimum per sampled argument of `λ` (the `λ = 0` and `ξ = 0`
    /// boundary points count for every argument).
    pub per_ray_minima: Vec<RayMinimum>,
}

pub(crate) fn x_points(dim: usize, density: usize, needed: bool) -> Vec<Vec<f64>> {
    if !needed {
        return vec![vec![0.0; dim]];
    }
    let density = density.max(1);
    let total = density.pow(dim as u32);
    (0..total)
        .map(|mut k| {
            let mut x = vec![0.0; dim];
            for i in (0..dim).rev() {
                x[i] = TAU * (k % density) as f64 / density as f64;
                k /= density;
            }
            x
        })
        .collect()
}

struct Best {
    value: f64,
    x: usize,
    point: usize,
}

/// Decides parameter-ellipticity of `fam` in `sector` by sampling the
/// principal sum on the weighted sphere `|ξ|² + |λ|^{2/m} = 1`, `λ ∈ K`.
pub fn check_parameter_ellipticity(
    fam: &ParameterFamily,
    sector: &Sector,
    cfg: &EllipticityConfig,
) -> Result<MarginReport> {
    let dim = fam.dim();
    let (pts, dirs, args) = sample_parameter_sphere(dim, fam.m(), sector, &cfg.densities)?;
    let xs = x_points(dim, cfg.x_density, fam.depends_on_x());

    // Per-x scans run in parallel; the merge below is sequential in x order
    // so ties resolve identically on any thread count.
    let per_x: Vec<(Best, Vec<f64>)> = xs
        .par_iter()
        .enumerate()
        .map(|(xi_idx, x)| {
            let mut best = Best {
                value: f64::INFINITY,
                x: xi_idx,
                point: 0,
            };
            let mut rays = vec![f64::INFINITY; args.len()];
            let mut zero_level = f64::INFINITY;
            for (k, p) in pts.iter().enumerate() {
                let v = fam.principal_unchecked(x, &p.xi, p.lambda).norm();
                if v < best.value {
                    best = Best {
                        value: v,
                        x: xi_idx,
                        point: k,
                    };
                }
                match p.arg {
                    Some(a) => rays[a] = rays[a].min(v),
                    None => zero_level = zero_level.min(v),
                }
            }
            for r in &mut rays {
                *r = r.min(zero_level);
            }
            (best, rays)
        })
        .collect();

    let mut best = Best {
        value: f64::INFINITY,
        x: 0,
        point: 0,
    };
    let mut rays = vec![f64::INFINITY; args.len()];
    for (b, r) in per_x {
        if b.value < best.value {
            best = b;
        }
        for (acc, v) in rays.iter_mut().zip(r) {
            *acc = acc.min(v);
        }
    }

    let p = &pts[best.point];
    let mut margin = best.value;
    let mut witness = Witness {
        x: xs[best.x].clone(),
        xi: p.xi.clone(),
        lambda: p.lambda,
    };

    if cfg.refine && margin > 0.0 {
        let mut starts: Vec<(f64, usize, usize)> = Vec::new();
        starts.push((best.value, best.x, best.point));
        if let Some((v, w)) = refine(fam, sector, cfg, &xs, &pts, &dirs, &starts) {
            if v < margin {
                margin = v;
                witness = w;
            }
        }
    }

    Ok(MarginReport {
        is_elliptic: margin > cfg.threshold,
        margin,
        threshold: cfg.threshold,
        witness,
        sampling: SamplingSpec {
            n_xi: cfg.densities.n_xi,
            n_lambda: cfg.densities.n_lambda,
            directions: dirs.len(),
            args: args.len(),
            x_points: xs.len(),
            sphere_points: pts.len(),
            refined: cfg.refine,
        },
        per_ray_minima: args
            .iter()
            .zip(rays)
            .map(|(&arg, margin)| RayMinimum { arg, margin })
            .collect(),
    })
}

/// Local search in `(α, arg λ, direction angles, x)` from the given sample
/// indices.
fn refine(
    fam: &ParameterFamily,
    sector: &Sector,
    cfg: &EllipticityConfig,
    xs: &[Vec<f64>],
    pts: &[SpherePoint],
    dirs: &[super::sphere::Direction],
    starts: &[(f64, usize, usize)],
) -> Option<(f64, Witness)> {
    let dim = fam.dim();
    let m = fam.m();
    let vary_x = fam.depends_on_x();
    let vary_theta = !sector.is_ray();
    let n_angles = if dim == 1 { 0 } else { dim - 1 };
    let mut best: Option<(f64, Witness)> = None;

    for &(_, xi_idx, pi) in starts {
        let p = &pts[pi];
        let sign = if dim == 1 && p.xi.first().copied().unwrap_or(1.0) < 0.0 { -1.0 } else { 1.0 };
        let dir = &dirs[p.dir];
        let theta0 = if p.lambda.norm() > 0.0 { p.lambda.arg() } else { sector.theta_min };
        let theta0 = if sector.contains(Complex64::from_polar(1.0, theta0)) && vary_theta {
            // keep the sampled value, expressed inside [theta_min, theta_max]
            sector.theta_min + (theta0 - sector.theta_min).rem_euclid(TAU).min(sector.width())
        } else {
            sector.theta_min
        };

        let mut start = vec![p.alpha];
        let mut steps = vec![FRAC_PI_2 / (2.0 * cfg.densities.n_lambda as f64)];
        if vary_theta {
            start.push(theta0);
            steps.push((cfg.densities.arg_step() / 2.0).min(sector.width() / 2.0));
        }
        start.extend(&dir.angles);
        steps.extend(std::iter::repeat_n(TAU / (2.0 * cfg.densities.n_xi as f64), n_angles));
        if vary_x {
            start.extend(&xs[xi_idx]);
            steps.extend(std::iter::repeat_n(TAU / (2.0 * cfg.x_density.max(1) as f64), dim));
        }

        let decode = |q: &[f64]| -> (Vec<f64>, Vec<f64>, Complex64) {
            let alpha = q[0].clamp(0.0, FRAC_PI_2);
            let mut i = 1;
            let theta = if vary_theta {
                i += 1;
                q[1].clamp(sector.theta_min, sector.theta_max)
            } else {
                sector.theta_min
            };
            let angles = &q[i..i + n_angles];
            i += n_angles;
            let x = if vary_x { q[i..i + dim].to_vec() } else { xs[0].clone() };
            let omega = direction_from_angles(dim, angles, sign);
            let (s, c) = alpha.sin_cos();
            let c = if alpha == FRAC_PI_2 { 0.0 } else { c };
            let xi: Vec<f64> = omega.iter().map(|v| c * v).collect();
            (x, xi, Complex64::from_polar(s.powf(m), theta))
        };
        let mut f = |q: &[f64]| {
            let (x, xi, lambda) = decode(q);
            fam.principal_unchecked(&x, &xi, lambda).norm()
        };
        let (q, v) = minimize(
            &mut f,
            &start,
            &steps,
            &Options {
                max_evals: 400 * start.len().max(2),
                f_tol: 1e-20,
            },
        );
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            let (x, xi, lambda) = decode(&q);
            best = Some((v, Witness { x, xi, lambda }));
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectCheck {
    /// The principal symbol stays outside `K` on the sampled cosphere.
    pub avoids: bool,
    /// `min dist(a₀(x, ω), K)` over the samples.
    pub distance: f64,
    pub witness_x: Vec<f64>,
    pub witness_xi: Vec<f64>,
}

/// For `A(λ) = A − λI`: does the principal symbol of `A` on the unit
/// cosphere avoid `K`? Uses the directions and `x`-grid of `cfg`.
pub fn check_resolvent_form(a: &PolyhomSymbol, sector: &Sector, cfg: &EllipticityConfig) -> Result<DirectCheck> {
    cfg.densities.validate()?;
    let dirs = unit_directions(a.dim(), cfg.densities.n_xi);
    let xs = x_points(a.dim(), cfg.x_density, a.depends_on_x());
    let mut best = (f64::INFINITY, 0usize, 0usize);
    for (i, x) in xs.iter().enumerate() {
        for (j, d) in dirs.iter().enumerate() {
            let v = sector.distance(a.principal_value(x, &d.vector));
            if v < best.0 {
                best = (v, i, j);
            }
        }
    }
    Ok(DirectCheck {
        avoids: best.0 > cfg.threshold,
        distance: best.0,
        witness_x: xs[best.1].clone(),
        witness_xi: dirs[best.2].vector.clone(),
    })
}
