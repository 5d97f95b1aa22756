use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),

    /// A caller violated an operation's precondition (shape, size, symmetry).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("schema version mismatch: expected {expected}, found {found}")]
    Version { expected: String, found: String },

    #[error("generation stopped after {achieved} of {requested} graphs: {reason}")]
    Generation {
        achieved: usize,
        requested: usize,
        reason: String,
    },

    #[error("did not converge: {0}")]
    Convergence(String),

    #[error("missing input {}: run `{producer}` first", path.display())]
    MissingInput { path: PathBuf, producer: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("artifact mismatch: {0}")]
    Mismatch(String),

    #[error("runtime failure: {0}")]
    Runtime(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }
}
