use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input text. `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A structurally well-formed graph or dataset breaks an invariant.
    #[error("{rule} in graph {graph}")]
    Validation { graph: usize, rule: String },

    /// An argument violates an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A size or node budget was exceeded.
    #[error("resource limit: {0}")]
    Resource(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn validation(graph: usize, rule: impl Into<String>) -> Self {
        Error::Validation {
            graph,
            rule: rule.into(),
        }
    }
}
