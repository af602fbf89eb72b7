use thiserror::Error;

/// Errors raised by the forward model, the operator tools and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The Robin coefficient is not bounded away from zero, so the bilinear
    /// form loses coercivity.
    #[error("Robin coefficient must be positive, found minimum {min}")]
    Coercivity { min: f64 },

    /// A factorization or eigen-solve broke down.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An iterative linear solver stopped before reaching its tolerance.
    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("mesh file: {0}")]
    MeshFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
