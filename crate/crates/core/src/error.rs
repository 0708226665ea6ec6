use thiserror::Error;

/// Errors raised by the numerical routines and the file loaders.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An input violates a structural precondition (grid shape, degree, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Every member of a test family is zero, so no ratio can be formed.
    #[error("degenerate family: {0}")]
    Degenerate(String),
    /// A file could not be parsed. `line` is 1-based, 0 when unknown.
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: u64,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}

impl Error {
    pub fn from_json(source_name: &str, err: serde_json::Error) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line: err.line() as u64,
            message: err.to_string(),
        }
    }

    pub fn from_csv(source_name: &str, err: csv::Error) -> Self {
        let line = err.position().map(|p| p.line()).unwrap_or(0);
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            message: err.to_string(),
        }
    }
}
