use std::io;
use std::path::Path;

/// Failures of a `gass` invocation, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("validation failed:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("{0}")]
    Capacity(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse { .. } | CliError::Io { .. } => 2,
            CliError::Validation(_) => 3,
            CliError::Capacity(_) => 4,
        }
    }

    pub fn parse(path: &Path, message: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.display().to_string(),
            message: message.into(),
        }
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<gass_core::Error> for CliError {
    fn from(e: gass_core::Error) -> Self {
        use gass_core::Error as E;
        match e {
            E::InvalidArgument(m) => CliError::Usage(m),
            E::NotFound(m) | E::Validation(m) => CliError::Validation(vec![m]),
            E::Capacity(m) => CliError::Capacity(m),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
