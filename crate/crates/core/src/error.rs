use std::fmt;

/// Error type shared by all kernel operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// An exponent or parameter violates the documented constraints.
    Parameter(String),
    /// A cube/region/function does not belong to the mesh at hand.
    Domain(String),
    /// The operation is not defined for this mesh kind or dimension.
    Unsupported(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parameter(msg) => write!(f, "parameter error: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn par_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

pub(crate) fn dom_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
