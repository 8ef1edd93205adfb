use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the quality toolkit.
#[derive(Debug, Error)]
pub enum MsiqError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot decode {path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Total mass at or below the degeneracy threshold; centroid and normalized moments are undefined.
    #[error("degenerate image: total mass {mass:e} is not above {threshold:e}")]
    DegenerateImage { mass: f64, threshold: f64 },

    #[error("descriptor mismatch: {0}")]
    DescriptorMismatch(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),
}

impl MsiqError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        MsiqError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        MsiqError::Parameter(msg.into())
    }
}

pub type Result<T, E = MsiqError> = std::result::Result<T, E>;
