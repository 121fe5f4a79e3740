//! Band-limited distributions on the torus and their weighted norms.
//!
//! A [`SpectralField`] stores `û(ξ)` on the lattice of a [`TorusGrid`]. All
//! norms are finite lattice sums, computed with pairwise summation so that
//! results do not depend on thread count.

mod embedding;
mod field;
pub mod io;
mod norms;
mod torus;

pub use embedding::{embedding_check, EmbeddingConfig, EmbeddingReport};
pub use field::{transform_forward, transform_inverse, SpectralField};
pub use norms::{
    hoermander_inner, hoermander_norm, param_norm, radial_weight_norm, sobolev_norm, table_norm,
};
pub(crate) use norms::weight_table;
pub use torus::TorusGrid;
