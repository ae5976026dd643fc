use thiserror::Error;

/// Library error. The variants map one-to-one onto CLI exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("state space of {required} configurations exceeds the enumeration cap {cap}")]
    Capacity { required: u128, cap: u64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported perturbation: {0}")]
    Unsupported(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
