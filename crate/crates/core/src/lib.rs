//! Restarted Krylov subspace evaluation of `y(t) = exp(-tA) v` for sparse
//! `A` with `Re(x*Ax) ≥ 0`.
//!
//! The solvers monitor the exponential residual `r_k(s) = -y_k'(s) - A y_k(s)`
//! and restart in time: when a Krylov space of the allowed size cannot
//! reach the tolerance on all of `[0, t]`, the solution is advanced to the
//! largest `δ` where it can, and the remaining problem on `[0, t - δ]` is
//! solved from there.
//!
//! - [`restart::rt_solve`]: fixed restart length.
//! - [`restart::art_solve`]: restart length adapted from cost estimates.
//! - [`sai::sai_rt_solve`]: shift-and-invert Krylov space with the same restarting.
//! - [`restart::fixed_step_solve`]: plain time stepping, for comparison.

pub mod arnoldi;
pub mod cli;
pub mod config;
pub mod dense;
pub mod error;
pub mod expm_krylov;
pub mod mmio;
pub mod problems;
pub mod report;
pub mod restart;
pub mod sai;
pub mod sparse;
pub mod sparse_lu;
pub mod vector;

pub use arnoldi::{ArnoldiDecomposition, Projection};
pub use config::{ArtParams, CostModel, Method, Shift, SolverConfig};
pub use dense::DenseMatrix;
pub use error::{KrylovError, Result};
pub use report::{Solution, SolveReport};
pub use sparse::{CsrMatrix, LinearOperator};

/// Runs the method selected in `cfg`.
pub fn solve(a: &CsrMatrix, v: &[f64], cfg: &SolverConfig) -> Result<Solution> {
    match cfg.method {
        Method::Rt => restart::rt_solve(a, v, cfg),
        Method::Art => restart::art_solve(a, v, cfg),
        Method::SaiRt => sai::sai_rt_solve(a, v, cfg),
        Method::FixedStep => restart::fixed_step_solve(a, v, cfg),
    }
}
