use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] robust_merton::Error),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed config {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("malformed CSV at line {line}: {message}")]
    MalformedCsv { line: u64, message: String },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("cannot write {path}: {message}")]
    WriteFailure { path: PathBuf, message: String },

    #[error("sim config required: add a \"sim\" block to the config")]
    SimConfigRequired,

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn write(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CliError::WriteFailure {
            path: path.into(),
            message: err.to_string(),
        }
    }
}
