use thiserror::Error;

/// Errors raised by evaluation operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Prefixes the message with `context`, keeping the variant.
    pub fn context(self, context: &str) -> Self {
        match self {
            Error::InvalidArgument(m) => Error::InvalidArgument(format!("{context}: {m}")),
            Error::NotFound(m) => Error::NotFound(format!("{context}: {m}")),
            Error::Validation(m) => Error::Validation(format!("{context}: {m}")),
            Error::Capacity(m) => Error::Capacity(format!("{context}: {m}")),
        }
    }
}
