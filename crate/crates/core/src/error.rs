use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, OutageError>;

#[derive(Debug, Error)]
pub enum OutageError {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty channel sample set")]
    EmptySampleSet,

    #[error("infeasible point: {0}")]
    Infeasible(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed sample-set file {path}: {reason}")]
    MalformedSampleFile { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl OutageError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        OutageError::Io {
            path: path.into(),
            source,
        }
    }
}
