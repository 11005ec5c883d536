use std::path::PathBuf;

use qle_core::QleError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("config field `{field}`: {message}")]
    Field { field: String, message: String },

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),

    #[error(transparent)]
    Core(#[from] QleError),

    #[error("{failed} of {total} validation checks failed")]
    Validation { failed: usize, total: usize },
}

impl CliError {
    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Field { field: field.into(), message: message.into() }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
