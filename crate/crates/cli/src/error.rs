use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Domain(_) => ExitCode::from(1),
            CliError::Io { .. } | CliError::Parse(_) => ExitCode::from(2),
        }
    }

    pub fn io(path: &str, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_string(), source }
    }
}

impl From<switched_bt::Error> for CliError {
    fn from(e: switched_bt::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
