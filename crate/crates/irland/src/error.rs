use std::path::PathBuf;

use irland_core::lightfield::{FieldError, FitError};
use irland_core::scenario::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    /// Malformed or invalid config document; `path` is the dotted key path.
    #[error("config: {path}: {message}")]
    Config { path: String, message: String },

    #[error("{message} at row {row}")]
    Grid { row: u64, message: String },

    #[error(transparent)]
    Scenario(#[from] ConfigError),

    #[error("field: {0}")]
    Field(#[from] FieldError),

    #[error("fit: {0}")]
    Fit(#[from] FitError),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl ToString) -> Self {
        Error::Config {
            path: path.into(),
            message: message.to_string().trim_end().to_string(),
        }
    }

    pub(crate) fn grid(row: u64, message: impl Into<String>) -> Self {
        Error::Grid {
            row,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
