use thiserror::Error;

/// Command failures, each tied to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("verification failed")]
    Verification,
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Verification => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<spinboson::Error> for CliError {
    fn from(e: spinboson::Error) -> Self {
        use spinboson::Error::*;
        match e {
            InvalidModel(_) | InvalidSector(_) | InvalidReference(_) | UnknownPreset(_) | MissingParam(_)
            | IncompatiblePreset(_) | Parse(_) | Output(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}
