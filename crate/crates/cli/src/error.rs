use thiserror::Error;

use crate::model_file::ModelFileError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Model(#[from] ModelFileError),
}

impl CliError {
    /// Process exit code: 1 usage, 2 numeric failure, 3 IO or model file.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Io(_) | CliError::Model(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<magicint::EimError> for CliError {
    fn from(e: magicint::EimError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<magicint::QuadError> for CliError {
    fn from(e: magicint::QuadError) -> Self {
        CliError::Numeric(e.to_string())
    }
}
