use std::io;

use thiserror::Error;

pub type Result<T, E = PpfError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum PpfError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("argument outside the function domain: {0}")]
    Domain(String),

    #[error("prototype filter is degenerate (coefficient sum is zero)")]
    DegenerateFilter,

    #[error("need at least {required} input spectra, got {available}")]
    InsufficientHistory { required: usize, available: usize },

    #[error("transform size {0} is not a power of two")]
    UnsupportedSize(usize),

    #[error("malformed input at byte offset {offset}: {reason}")]
    Decode { offset: u64, reason: String },

    #[error("malformed coefficient file: {0}")]
    Format(String),

    #[error("failed writing output: {0}")]
    Write(#[source] io::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl PpfError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        PpfError::Config(msg.into())
    }
}
