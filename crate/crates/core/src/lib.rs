//! Parameter-elliptic pseudodifferential operators on the extended Sobolev
//! scale, realized by Fourier spectral methods on the torus `Tⁿ`.
//!
//! The crate is organized bottom-up:
//!
//! * [`ro`]: RO-varying weights, Matuszewska index estimates and the
//!   interpolation parameter built from them.
//! * [`spectral`]: band-limited fields on `Tⁿ`, Hörmander norms
//!   `‖u‖_φ = (Σ φ(⟨ξ⟩)² |û(ξ)|²)^½` and parameter-dependent norms.
//! * [`psdo`]: polyhomogeneous symbols, toroidal quantization and the
//!   parameter family `A(λ) = Σ_j λ^{q−j} A_j`.
//! * [`ellipticity`]: sampling the weighted parameter sphere to decide
//!   parameter-ellipticity in an angle.
//! * [`interpolation`]: interpolation with a function parameter for
//!   multiplier-generated Hilbert couples.
//! * [`estimates`]: solvers, two-sided a priori constants and the threshold
//!   `λ₀`.
//!
//! The guide in `book/` walks through the same material with runnable
//! snippets; those snippets are compiled and run as doctests of this crate.

pub mod ellipticity;
pub mod error;
pub mod estimates;
pub mod expr;
pub mod grid;
pub mod interpolation;
pub mod psdo;
pub mod ro;
pub mod spectral;
pub mod sum;

pub use error::{Error, Result};
pub use grid::GeometricGrid;
pub use num_complex::Complex64;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/ro_functions.md")]
    mod ro_functions {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/symbols.md")]
    mod symbols {}
    #[doc = include_str!("../../../book/src/ellipticity.md")]
    mod ellipticity {}
    #[doc = include_str!("../../../book/src/interpolation.md")]
    mod interpolation {}
    #[doc = include_str!("../../../book/src/estimates.md")]
    mod estimates {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
