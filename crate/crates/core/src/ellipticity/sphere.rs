use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Sector;
use crate::error::{Error, Result};

/// Sampling densities on the weighted parameter sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereDensities {
    /// Directions per angular coordinate of the unit cosphere.
    pub n_xi: usize,
    /// Number of intervals splitting `α ∈ [0, π/2]`, where `|ξ| = cos α`
    /// and `|λ| = sin^m α`; also sets the argument step `π/(2·n_lambda)`.
    pub n_lambda: usize,
}

impl Default for SphereDensities {
    fn default() -> Self {
        SphereDensities {
            n_xi: 256,
            n_lambda: 64,
        }
    }
}

impl SphereDensities {
    pub fn validate(&self) -> Result<()> {
        if self.n_xi < 8 || self.n_lambda < 8 {
            return Err(Error::Domain(format!(
                "sphere densities must be at least 8, got n_xi = {}, n_lambda = {}",
                self.n_xi, self.n_lambda
            )));
        }
        Ok(())
    }

    pub fn doubled(&self) -> Self {
        SphereDensities {
            n_xi: 2 * self.n_xi,
            n_lambda: 2 * self.n_lambda,
        }
    }

    pub fn arg_step(&self) -> f64 {
        FRAC_PI_2 / self.n_lambda as f64
    }
}

/// A unit covector together with its hyperspherical angles.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub vector: Vec<f64>,
    pub angles: Vec<f64>,
}

/// Unit vector from hyperspherical angles; in 1-D `angles` is empty and
/// `sign` picks `±1`.
pub(crate) fn direction_from_angles(dim: usize, angles: &[f64], sign: f64) -> Vec<f64> {
    if dim == 1 {
        return vec![sign];
    }
    let mut v = Vec::with_capacity(dim);
    let mut prod = 1.0;
    for a in angles {
        v.push(prod * a.cos());
        prod *= a.sin();
    }
    v.push(prod);
    v
}

/// Directions on the unit cosphere of `ℝⁿ`: `±1` in 1-D, `n_xi` equally
/// spaced angles in 2-D, a nested latitude/longitude grid beyond. Doubling
/// `n_xi` yields a superset.
pub fn unit_directions(dim: usize, n_xi: usize) -> Vec<Direction> {
    match dim {
        0 => Vec::new(),
        1 => vec![
            Direction {
                vector: vec![1.0],
                angles: vec![],
            },
            Direction {
                vector: vec![-1.0],
                angles: vec![],
            },
        ],
        _ => {
            let step = TAU / n_xi as f64;
            let polar: Vec<f64> = (0..=n_xi / 2).map(|k| (k as f64 * step).min(PI)).collect();
            let azim: Vec<f64> = (0..n_xi).map(|k| k as f64 * step).collect();
            let mut grids: Vec<&[f64]> = vec![&polar; dim - 2];
            grids.push(&azim);
            let mut out = Vec::new();
            let mut idx = vec![0usize; dim - 1];
            loop {
                let angles: Vec<f64> = idx.iter().zip(&grids).map(|(&i, g)| g[i]).collect();
                out.push(Direction {
                    vector: direction_from_angles(dim, &angles, 1.0),
                    angles,
                });
                let mut d = dim - 1;
                loop {
                    if d == 0 {
                        return out;
                    }
                    d -= 1;
                    idx[d] += 1;
                    if idx[d] < grids[d].len() {
                        break;
                    }
                    idx[d] = 0;
                }
            }
        }
    }
}

/// One sample `(ξ, λ)` on `|ξ|² + |λ|^{2/m} = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    pub xi: Vec<f64>,
    pub lambda: Complex64,
    /// `α` with `|ξ| = cos α`.
    pub alpha: f64,
    /// Direction index (unused when `ξ = 0`).
    pub dir: usize,
    /// Index into the sampled arguments; `None` when `λ = 0`.
    pub arg: Option<usize>,
}

/// Samples of the weighted sphere with `λ ∈ K`, including the boundary
/// cases `(|ξ| = 1, λ = 0)` and `(ξ = 0, |λ| = 1)`.
///
/// With `D` directions and `A` sampled arguments the count is
/// `D·(n_lambda − 1)·A + D + A`; for a ray that is `D·n_lambda + 1`.
pub fn sample_parameter_sphere(
    dim: usize,
    m: f64,
    sector: &Sector,
    densities: &SphereDensities,
) -> Result<(Vec<SpherePoint>, Vec<Direction>, Vec<f64>)> {
    densities.validate()?;
    if !(m > 0.0) {
        return Err(Error::Domain(format!("weight m must be positive, got {m}")));
    }
    let dirs = unit_directions(dim, densities.n_xi);
    let args = sector.sample_args(densities.arg_step());
    let nl = densities.n_lambda;
    let mut pts = Vec::with_capacity(dirs.len() * (nl - 1) * args.len() + dirs.len() + args.len());
    for (d, dir) in dirs.iter().enumerate() {
        pts.push(SpherePoint {
            xi: dir.vector.clone(),
            lambda: Complex64::new(0.0, 0.0),
            alpha: 0.0,
            dir: d,
            arg: None,
        });
    }
    for k in 1..nl {
        let alpha = k as f64 * FRAC_PI_2 / nl as f64;
        let (s, c) = alpha.sin_cos();
        let modulus = s.powf(m);
        for (a, &theta) in args.iter().enumerate() {
            let lambda = Complex64::from_polar(modulus, theta);
            for (d, dir) in dirs.iter().enumerate() {
                pts.push(SpherePoint {
                    xi: dir.vector.iter().map(|v| c * v).collect(),
                    lambda,
                    alpha,
                    dir: d,
                    arg: Some(a),
                });
            }
        }
    }
    for (a, &theta) in args.iter().enumerate() {
        pts.push(SpherePoint {
            xi: vec![0.0; dim],
            lambda: Complex64::from_polar(1.0, theta),
            alpha: FRAC_PI_2,
            dir: 0,
            arg: Some(a),
        });
    }
    Ok((pts, dirs, args))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_lie_on_the_weighted_sphere() {
        for (dim, m) in [(1, 1.0), (2, 2.0), (3, 0.5)] {
            let k = Sector::new(-0.5, 1.0).unwrap();
            let (pts, _, _) =
                sample_parameter_sphere(dim, m, &k, &SphereDensities { n_xi: 8, n_lambda: 8 }).unwrap();
            for p in &pts {
                let r: f64 = p.xi.iter().map(|v| v * v).sum::<f64>() + p.lambda.norm().powf(2.0 / m);
                assert!((r - 1.0).abs() < 1e-12);
                assert!(k.contains(p.lambda));
            }
        }
    }

    #[test]
    fn boundary_points_and_count() {
        let d = SphereDensities { n_xi: 16, n_lambda: 8 };
        let (pts, dirs, args) = sample_parameter_sphere(2, 2.0, &Sector::ray(PI), &d).unwrap();
        assert_eq!(args.len(), 1);
        assert_eq!(dirs.len(), 16);
        assert_eq!(pts.len(), 16 * 8 + 1);
        assert!(pts.iter().any(|p| p.lambda.norm() == 0.0 && (p.xi[0].hypot(p.xi[1]) - 1.0).abs() < 1e-15));
        assert!(pts.iter().any(|p| p.xi == vec![0.0, 0.0] && (p.lambda.norm() - 1.0).abs() < 1e-15));

        let k = Sector::new(-PI / 4.0, PI / 4.0).unwrap();
        let (pts, dirs, args) = sample_parameter_sphere(2, 2.0, &k, &d).unwrap();
        assert_eq!(pts.len(), dirs.len() * 7 * args.len() + dirs.len() + args.len());
        assert_eq!(args.first(), Some(&(-PI / 4.0)));
        assert_eq!(args.last(), Some(&(PI / 4.0)));
    }

    #[test]
    fn densities_are_checked() {
        assert!(sample_parameter_sphere(2, 2.0, &Sector::ray(0.0), &SphereDensities { n_xi: 4, n_lambda: 8 }).is_err());
    }

    #[test]
    fn doubling_nests_directions() {
        for dim in [2, 3] {
            let a = unit_directions(dim, 8);
            let b = unit_directions(dim, 16);
            for d in &a {
                assert!(b.iter().any(|e| e.vector.iter().zip(&d.vector).all(|(x, y)| (x - y).abs() < 1e-12)));
            }
            for d in &b {
                let n: f64 = d.vector.iter().map(|v| v * v).sum();
                assert!((n - 1.0).abs() < 1e-12);
            }
        }
    }
}
