use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("size limit exceeded: {what} is {actual}, limit {limit}")]
    Size {
        what: &'static str,
        actual: usize,
        limit: usize,
    },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("degenerate sample: {0}")]
    Degenerate(String),
    #[error("construction corrupted: {0}")]
    Corruption(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
