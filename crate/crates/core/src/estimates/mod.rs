//! Solving `A(λ)u = f` and measuring the two-sided estimate
//!
//! ```text
//! c⁻¹‖A(λ)u‖_φ ≤ ‖u‖_{φϱ^{mq}} + |λ|^q‖u‖_φ ≤ c‖A(λ)u‖_φ
//! ```
//!
//! on the lattice, together with the auxiliary norm inequalities used to
//! derive it.

mod constants;
mod inequalities;
mod lambda0;
mod solve;
mod sweep;

pub use constants::{apriori_constants, AprioriConstants, TrialCorpus, RANDOM_DECAY, RANDOM_TRIALS};
pub use inequalities::{verify_interp_inequality, verify_sandwich, Sandwich, Slack};
pub use lambda0::{find_lambda0, Lambda0Config, Lambda0Criterion, Lambda0Report, RayThreshold};
pub use solve::{relative_residual, solve, solve_with, Solution, SolveConfig, DEGENERACY_RATIO};
pub use sweep::{estimate_sweep, log_slope, sweep_csv, SweepRow, SweepSpec};
