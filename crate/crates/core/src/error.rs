use thiserror::Error;

/// Errors raised by the exact and numerical layers of the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("divergent kernel: {0}")]
    DivergentKernel(String),

    #[error("quadrature failed after {evaluations} evaluations: estimate {estimate:e}, error {error:e} (requested {requested:e})")]
    Quadrature {
        estimate: f64,
        error: f64,
        requested: f64,
        evaluations: usize,
    },

    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },

    #[error("internal consistency violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
