use thiserror::Error;

/// Errors raised by the stochastic Galerkin machinery and the solver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("singular Galerkin operator (smallest |eigenvalue| = {min_abs_eigenvalue:e})")]
    SingularOperator { min_abs_eigenvalue: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue = {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("non-hyperbolic state: {0}")]
    NonHyperbolic(String),

    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),

    #[error("unknown scenario id {0} (expected 1..=5)")]
    UnknownScenario(u32),

    #[error("solver aborted at t = {t}: {reason}")]
    SolverAbort { t: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
