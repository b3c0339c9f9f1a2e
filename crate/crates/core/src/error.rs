use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("field must be nonzero")]
    ZeroField,

    #[error("nonlinear term vanishes: field is supported where Q = 0")]
    NonlinearTermVanishes,

    #[error("field is off the Nehari manifold (residual {residual:e}, tolerance {tolerance:e})")]
    OffManifold { residual: f64, tolerance: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("every component fell below the triviality threshold")]
    AllTrivial,

    #[error("Newton refinement failed: {0}")]
    RefineFailed(String),

    #[error("every solve in the sweep failed to converge")]
    SweepFailed,

    #[error("final continuation entry did not converge")]
    NotConverged,

    #[error("tail decay rate undetermined: {0}")]
    TailUndetermined(String),
}

pub type Result<T> = std::result::Result<T, Error>;
