use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an operation's inputs was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A configuration file could not be parsed or failed validation.
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
