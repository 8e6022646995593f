use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("insufficient data: {0}")]
    Insufficient(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("insufficient radial coverage: tail carries {tail:.3e} of the norm")]
    Coverage { tail: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
