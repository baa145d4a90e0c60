use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("matrix is not self-adjoint (max deviation {0:e})")]
    NotSelfAdjoint(f64),

    #[error("set is empty")]
    EmptySet,

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: String,
        iterations: usize,
        residual: f64,
    },

    /// Lehner minimization stalled; the best iterate found is attached.
    #[error("Lehner minimization did not converge after {} iterations (best value {})", .0.iterations, .0.value)]
    LehnerStalled(Box<crate::free::LehnerSolution>),

    #[error("memory cap exceeded: {0}")]
    MemoryCap(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the CLI: 2 for validation errors, 3 for
    /// solver non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoConvergence { .. } | Error::LehnerStalled(_) => 3,
            Error::Io(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
