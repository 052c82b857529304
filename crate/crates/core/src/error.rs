use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulator and its I/O layer.
#[derive(Debug, Error)]
pub enum Error {
    /// Lattice cannot be built within the requested size or memory budget.
    #[error("sizing error: {0}")]
    Sizing(String),

    /// An argument lies outside the domain of the operation (site outside the
    /// pyramid, coincident sites, invalid probability, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested computation exceeds a configured capacity limit.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// A configuration document failed to parse or validate.
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
