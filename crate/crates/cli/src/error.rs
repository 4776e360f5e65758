use std::path::Path;

use thiserror::Error;

/// Everything that ends a run early, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("degenerate statistics: {0}")]
    Degenerate(String),
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    pub fn write(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Output {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    pub fn read(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Data(format!("cannot read {}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) | CliError::Output { .. } => 2,
            CliError::Degenerate(_) => 3,
        }
    }
}

impl From<tonsure_core::Error> for CliError {
    fn from(e: tonsure_core::Error) -> Self {
        use tonsure_core::Error as E;
        match e {
            E::InvalidParameter(_) | E::InvalidPercent(_) => CliError::Usage(e.to_string()),
            e if e.is_data_error() => CliError::Data(e.to_string()),
            e => CliError::Degenerate(e.to_string()),
        }
    }
}
