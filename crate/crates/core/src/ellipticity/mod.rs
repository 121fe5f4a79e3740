//! Parameter-ellipticity of `A(λ)` in a closed angle `K`.
//!
//! The principal sum `p(x, ξ, λ) = Σ_j λ^{q−j} a_{j,0}(x, ξ)` satisfies
//! `p(x, tξ, t^m λ) = t^{mq} p(x, ξ, λ)`, so it is enough to look at the
//! compact set `|ξ|² + |λ|^{2/m} = 1`. The margin is the sampled minimum of
//! `|p|` there.

mod check;
mod nelder_mead;
mod sector;
mod sphere;

pub use check::{
    check_parameter_ellipticity, check_resolvent_form, DirectCheck, EllipticityConfig, MarginReport,
    RayMinimum, SamplingSpec, Witness,
};
pub use sector::{left_ray, Sector};
pub use sphere::{sample_parameter_sphere, unit_directions, Direction, SphereDensities, SpherePoint};

use num_complex::Complex64;

use crate::error::Result;
use crate::psdo::ParameterFamily;

/// `Σ_j λ^{q−j} a_{j,0}(x, ξ)`.
pub fn principal_symbol_sum(fam: &ParameterFamily, x: &[f64], xi: &[f64], lambda: Complex64) -> Result<Complex64> {
    fam.principal_symbol_sum(x, xi, lambda)
}
