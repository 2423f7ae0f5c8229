use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    /// Malformed or inconsistent input data (score files, bundles, edge lists).
    #[error("data error: {0}")]
    Data(String),

    #[error("digest mismatch: manifest records {expected}, tables hash to {actual}")]
    DigestMismatch { expected: String, actual: String },

    #[error("schema version mismatch: bundle has {found}, this build reads {expected}")]
    SchemaVersion { expected: u32, found: u32 },

    #[error("undefined statistic: {0}")]
    Undefined(String),

    #[error("calibration gate failed: {0}")]
    Calibration(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 config, 2 io, 3 validation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Calibration(_) => 1,
            Error::Io { .. } => 2,
            Error::Validation(_)
            | Error::Data(_)
            | Error::DigestMismatch { .. }
            | Error::SchemaVersion { .. }
            | Error::Undefined(_) => 3,
        }
    }
}
