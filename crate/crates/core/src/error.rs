use thiserror::Error;

/// Errors raised by model construction, file handling and the samplers.
#[derive(Debug, Error)]
pub enum Error {
    /// Structurally invalid in-memory input (length mismatch, bad indices, ...).
    #[error("input error: {0}")]
    Input(String),

    /// Malformed text input; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Invalid hyperparameters or an infeasible chain configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Internal invariant violation.
    #[error("logic error: {0}")]
    Logic(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
