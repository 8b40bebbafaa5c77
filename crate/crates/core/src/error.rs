use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("eigensolver failed to converge for eigenvalue {index} after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        index: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("unsupported: {0}")]
    Capability(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}
