//! Polyhomogeneous symbols on `Tⁿ`, their toroidal quantization and the
//! parameter family `A(λ)`.
//!
//! Quantization is `Op(s)u(x) = Σ_ξ s(x, ξ) û(ξ) e^{iξ·x}`. Three code paths
//! share this definition: `x`-independent symbols act as Fourier
//! multipliers, sums of products `c_m(x)·b_m(ξ)` go through one FFT pair per
//! term, and anything else falls back to the direct double sum on small
//! lattices.

mod bounds;
mod family;
mod quantize;
mod symbol;

pub use bounds::{operator_norm_estimate, NormEstimate};
pub use family::{assemble_family, CompiledFamily, FamilyOperator, ParameterFamily};
pub use quantize::{apply_psdo, LinearOperator, Multiplier, QuantizedSymbol, SeparableTerm, DENSE_CAPACITY};
pub use symbol::{eval_symbol, HomogeneousComponent, PolyhomSymbol};
