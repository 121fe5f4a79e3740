use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Env, Expr};

const ANGLE_SLACK: f64 = 1e-12;

/// A closed angle `K = {λ : λ = 0 or arg λ ∈ [θ_min, θ_max]}` with vertex at
/// the origin; `θ_min = θ_max` is a ray.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub theta_min: f64,
    pub theta_max: f64,
}

impl Sector {
    pub fn new(theta_min: f64, theta_max: f64) -> Result<Self> {
        if !(theta_min.is_finite() && theta_max.is_finite()) {
            return Err(Error::Domain("sector angles must be finite".into()));
        }
        if !(theta_min <= theta_max && theta_max <= theta_min + TAU + ANGLE_SLACK) {
            return Err(Error::Domain(format!(
                "need theta_min <= theta_max <= theta_min + 2pi, got [{theta_min}, {theta_max}]"
            )));
        }
        Ok(Sector {
            theta_min,
            theta_max,
        })
    }

    pub fn ray(theta: f64) -> Self {
        Sector {
            theta_min: theta,
            theta_max: theta,
        }
    }

    pub fn is_ray(&self) -> bool {
        self.theta_min == self.theta_max
    }

    pub fn width(&self) -> f64 {
        self.theta_max - self.theta_min
    }

    pub fn contains(&self, lambda: Complex64) -> bool {
        if lambda.norm() == 0.0 {
            return true;
        }
        let d = (lambda.arg() - self.theta_min).rem_euclid(TAU);
        d <= self.width() + ANGLE_SLACK || d >= TAU - ANGLE_SLACK
    }

    /// True if `other ⊆ self`.
    pub fn contains_sector(&self, other: &Sector) -> bool {
        if self.width() >= TAU - ANGLE_SLACK {
            return true;
        }
        let d = (other.theta_min - self.theta_min).rem_euclid(TAU);
        let d = if d >= TAU - ANGLE_SLACK { 0.0 } else { d };
        d + other.width() <= self.width() + ANGLE_SLACK
    }

    /// Sampled arguments: both edges plus every multiple of `step` strictly
    /// inside. Multiples of a common step keep samples of nested sectors
    /// nested.
    pub fn sample_args(&self, step: f64) -> Vec<f64> {
        if self.is_ray() {
            return vec![self.theta_min];
        }
        let mut out = vec![self.theta_min];
        let first = (self.theta_min / step).floor() as i64 + 1;
        let mut j = first;
        loop {
            let a = j as f64 * step;
            if a >= self.theta_max - ANGLE_SLACK {
                break;
            }
            if a > self.theta_min + ANGLE_SLACK {
                out.push(a);
            }
            j += 1;
        }
        out.push(self.theta_max);
        out
    }

    /// Euclidean distance from `z` to `K`.
    pub fn distance(&self, z: Complex64) -> f64 {
        if self.contains(z) {
            return 0.0;
        }
        [self.theta_min, self.theta_max]
            .iter()
            .map(|&th| {
                let w = z * Complex64::from_polar(1.0, -th);
                if w.re <= 0.0 {
                    z.norm()
                } else {
                    w.im.abs()
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ray() {
            write!(f, "ray:{}", self.theta_min)
        } else {
            write!(f, "sector:{},{}", self.theta_min, self.theta_max)
        }
    }
}

fn angle(src: &str) -> Result<f64> {
    let v = Expr::parse(src.trim())?.eval(&Env::scalar(f64::NAN));
    if v.im != 0.0 || !v.re.is_finite() {
        return Err(Error::Domain(format!("angle {src:?} is not a finite real number")));
    }
    Ok(v.re)
}

/// `ray:<angle>` or `sector:<min>,<max>`; angles are constant expressions
/// such as `pi`, `-pi/4`, `0.3`.
impl FromStr for Sector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            position: 0,
            message: format!("expected ray:<angle> or sector:<min>,<max>, got {s:?}"),
        };
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "ray" => Ok(Sector::ray(angle(rest)?)),
            "sector" => {
                let (a, b) = rest.split_once(',').ok_or_else(bad)?;
                Sector::new(angle(a)?, angle(b)?)
            }
            _ => Err(bad()),
        }
    }
}

/// The left ray `arg λ = π`.
pub fn left_ray() -> Sector {
    Sector::ray(PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership() {
        let k = Sector::new(-PI / 4.0, PI / 4.0).unwrap();
        assert!(k.contains(Complex64::new(1.0, 0.0)));
        assert!(k.contains(Complex64::new(1.0, 1.0)));
        assert!(!k.contains(Complex64::new(1.0, 1.01)));
        assert!(k.contains(Complex64::new(0.0, 0.0)));
        let left = left_ray();
        assert!(left.contains(Complex64::new(-3.0, 0.0)));
        assert!(!left.contains(Complex64::new(-3.0, 1e-3)));
        // wrap-around: [3π/4, 5π/4] contains the negative axis from both sides
        let w = Sector::new(0.75 * PI, 1.25 * PI).unwrap();
        assert!(w.contains(Complex64::new(-1.0, -0.5)));
        assert!(w.contains(Complex64::new(-1.0, 0.5)));
    }

    #[test]
    fn scaling_invariance() {
        let k = Sector::new(0.2, 1.1).unwrap();
        for z in [Complex64::new(1.0, 0.5), Complex64::new(-1.0, 0.1), Complex64::new(0.3, 0.9)] {
            for t in [1e-6, 0.5, 7.0, 1e9] {
                assert_eq!(k.contains(z), k.contains(z * t));
            }
        }
    }

    #[test]
    fn parse_forms() {
        assert_eq!("ray:pi".parse::<Sector>().unwrap(), Sector::ray(PI));
        let s: Sector = "sector:-pi/4, pi/4".parse().unwrap();
        assert!((s.theta_min + PI / 4.0).abs() < 1e-15 && (s.theta_max - PI / 4.0).abs() < 1e-15);
        assert!("cone:1".parse::<Sector>().is_err());
        assert!("sector:1".parse::<Sector>().is_err());
        assert!("sector:1,0".parse::<Sector>().is_err());
        assert_eq!(s.to_string().parse::<Sector>().unwrap(), s);
    }

    #[test]
    fn arg_samples_include_edges_and_nest() {
        let k = Sector::new(-PI / 4.0, PI / 4.0).unwrap();
        let a = k.sample_args(PI / 16.0);
        assert_eq!(a.first(), Some(&(-PI / 4.0)));
        assert_eq!(a.last(), Some(&(PI / 4.0)));
        assert_eq!(a.len(), 9);
        let b = k.sample_args(PI / 32.0);
        assert!(a.iter().all(|x| b.iter().any(|y| (x - y).abs() < 1e-12)));
        assert_eq!(Sector::ray(1.0).sample_args(0.1), vec![1.0]);
    }

    #[test]
    fn distance_to_sector() {
        let k = Sector::new(0.0, PI / 2.0).unwrap();
        assert_eq!(k.distance(Complex64::new(1.0, 1.0)), 0.0);
        assert!((k.distance(Complex64::new(2.0, -1.0)) - 1.0).abs() < 1e-15);
        assert!((k.distance(Complex64::new(-1.0, -1.0)) - 2f64.sqrt()).abs() < 1e-15);
        assert!(k.contains_sector(&Sector::ray(0.3)));
        assert!(!k.contains_sector(&Sector::new(1.0, 2.0).unwrap()));
    }
}
