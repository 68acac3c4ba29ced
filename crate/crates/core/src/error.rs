use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("out of range: {value} exceeds limit {limit}")]
    OutOfRange { value: u64, limit: u64 },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("parse error at byte offset {offset}: {message}")]
    Parse { offset: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn check_range(value: u64, limit: u64) -> Result<()> {
    if value > limit {
        Err(Error::OutOfRange { value, limit })
    } else {
        Ok(())
    }
}
