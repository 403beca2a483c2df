use thiserror::Error;

/// Errors raised by the numerical kernels and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum KrylovError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix or vector contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("starting vector is zero")]
    ZeroStartVector,

    #[error("cannot step past a breakdown of the Arnoldi process")]
    StepPastBreakdown,

    #[error("Krylov dimension already equals the problem size {0}")]
    FullSpace(usize),

    #[error("time argument must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("residual-time search stagnated: no grid of {n_t} points resolves tol {tol:e}")]
    Stagnation { n_t: usize, tol: f64 },

    #[error("no convergence after {restarts} restarts (remaining time {t_remaining:e})")]
    NoConvergence { restarts: usize, t_remaining: f64 },

    #[error("fixed-step substep {substep} did not reach tolerance within {k_max} Krylov steps")]
    NoConvergenceAtStep { k_max: usize, substep: usize },

    #[error("shift-and-invert projection is singular")]
    SingularProjection,

    #[error("singular matrix in dense solve")]
    SingularMatrix,

    #[error("sparse factorization failed at pivot {row}: |pivot| = {pivot:e}")]
    FactorizationFailed { row: usize, pivot: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = KrylovError> = std::result::Result<T, E>;
