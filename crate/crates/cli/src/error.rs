use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{context}: {source}")]
    Divergence {
        context: String,
        source: ecoepi_core::Error,
    },
    /// Some reproduction or verification line item failed.
    #[error("{0}")]
    CheckFailed(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Validation(_) | CliError::Io { .. } | CliError::Csv { .. } => 1,
            CliError::Divergence { .. } => 2,
            CliError::CheckFailed(_) => 3,
        })
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    pub fn csv(path: impl Into<PathBuf>) -> impl FnOnce(csv::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Csv { path, source }
    }

    /// Maps a core error raised while solving `context`.
    pub fn solve(context: impl Into<String>) -> impl FnOnce(ecoepi_core::Error) -> CliError {
        let context = context.into();
        move |source| match source {
            ecoepi_core::Error::Divergence { .. } => CliError::Divergence { context, source },
            other => CliError::Validation(format!("{context}: {other}")),
        }
    }
}

impl From<ecoepi_core::Error> for CliError {
    fn from(e: ecoepi_core::Error) -> Self {
        match e {
            ecoepi_core::Error::Divergence { .. } => CliError::Divergence {
                context: "solve".into(),
                source: e,
            },
            other => CliError::Validation(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
