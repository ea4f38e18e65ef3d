//! Error type shared across the simulator.

use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by configuration, simulation, and persistence code.
#[derive(Debug, Error)]
pub enum SimError {
    /// A configuration value violates one of its invariants.
    #[error("invalid config: {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    /// An input is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Array or network dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A config file line could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A model file is malformed or has an unsupported version.
    #[error("model file error: {0}")]
    ModelFormat(String),

    /// An I/O failure, annotated with the path involved.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
