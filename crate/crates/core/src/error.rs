use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular channel: effective channel matrix has zero Frobenius norm")]
    SingularChannel,

    #[error("singular parameter: {0}")]
    SingularParameter(String),

    #[error("degenerate rotation: {0}")]
    DegenerateRotation(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("design rejected: injectivity margin {margin:e} (distinct symbol pairs collapse)")]
    DesignRejected { margin: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
