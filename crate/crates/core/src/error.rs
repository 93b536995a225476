use std::io;

use thiserror::Error;

/// Errors produced by the segmentation toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: invalid UTF-8")]
    Decode { line: usize },

    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("position {pos} out of range for length {len}")]
    OutOfBounds { pos: usize, len: usize },

    #[error("non-finite score at position {0}")]
    NonFinite(usize),

    #[error("training diverged at iteration {0}")]
    Diverged(usize),

    #[error("unknown label: {0}")]
    UnknownLabel(String),

    #[error("undefined result: {0}")]
    Undefined(&'static str),

    #[error("model format error: {0}")]
    Model(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
