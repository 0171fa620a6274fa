use thiserror::Error;

/// Errors produced by the transform, synthesis, closed-form and estimation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SwdftError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid window size n={n} for signal of length {len}")]
    InvalidWindow { n: usize, len: usize },

    #[error("index {index} out of range (must be < {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("invalid signal spec: {0}")]
    InvalidSpec(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("incomplete report: {0}")]
    IncompleteReport(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, SwdftError>;
