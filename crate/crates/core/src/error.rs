use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or out-of-range input data.
    #[error("invalid input: {0}")]
    Input(String),
    /// An operation was called outside its domain (e.g. `a ≰ b`).
    #[error("domain error: {0}")]
    Domain(String),
    /// Enumeration exceeded a size cap.
    #[error("size limit exceeded: {0}")]
    Size(String),
    /// Step-size underflow or Newton failure in an integrator.
    #[error("stiffness failure: {0}")]
    Stiffness(String),
    /// A certified postcondition failed; indicates a bug or an unsupported case.
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn internal<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Internal(msg.into()))
}
