use thiserror::Error;

/// Errors raised by the verification toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The total Hilbert dimension (or another size) exceeds the configured cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// A matrix failed a structural requirement such as Hermiticity.
    #[error("domain error: {0}")]
    Domain(String),
    /// The requested family or feature has no implementation.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// An internal invariant was violated.
    #[error("internal invariant breach: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
