use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("n = {n} is beyond the table horizon {horizon}")]
    OutOfHorizon { n: usize, horizon: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("root isolation failed: {0}")]
    RootIsolation(String),

    #[error("parse error at line {line}, position {position}: {message}")]
    Parse {
        line: usize,
        position: usize,
        message: String,
    },

    #[error("malformed count table: {0}")]
    Table(String),

    #[error("n = {n} exceeds the enumeration cap {cap}")]
    EnumerationCap { n: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
