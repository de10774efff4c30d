use std::path::PathBuf;

/// Errors raised by the simulator and its diagnostics.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the set on which the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration key is missing, unknown or has the wrong type.
    #[error("config error for `{key}`: {message}")]
    Config { key: String, message: String },

    /// A configuration parsed but violates a model invariant.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
