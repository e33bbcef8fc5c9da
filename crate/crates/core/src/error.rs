use std::io;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("format mismatch: {malformed} of {total} lines malformed (wrong field layout?)")]
    FormatMismatch { malformed: usize, total: usize },

    #[error("malformed line {line}: {reason}")]
    Malformed { line: usize, reason: String },

    #[error("training diverged at epoch {epoch}: {detail}")]
    Divergence { epoch: usize, detail: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("gradient oracle: {0}")]
    Oracle(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
