//! Column-wise block Gibbs machinery for the adaptive graphical lasso.
//!
//! Each sweep visits every column `i` of `Ω`, moves it to the last position
//! and redraws, in order, the off-diagonal column `β = ω₁₂`, the Schur
//! complement `γ = ω₂₂ − βᵀΩ₁₁⁻¹β`, the shrinkage rates `λ` of the column and
//! the latent scales `τ` of the column. The two samplers differ only in how
//! `β` is drawn.

mod audit;
mod chain;
mod partition;
mod state;
mod updates;

pub use audit::{Stage, ViolationAudit};
pub use chain::{run_chain, sweep, ChainConfig, ChainOutput, ColumnOrder, SamplerKind};
pub use partition::{make_partition, ColumnPartition};
pub use state::{Clamps, GibbsState};
pub use updates::{
    bgs_update_beta, c_inverse_times, compute_c_matrix, hit_and_run_interval, hit_and_run_step,
    hrs_update_beta, update_gamma, update_lambda_column, update_tau_column, HitAndRunStep,
};
