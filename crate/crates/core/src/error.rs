use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point or window falls outside the domain of a function model.
    #[error("domain error: {0}")]
    Domain(String),
    /// An argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A depth or size budget was exceeded.
    #[error("resource limit: {0}")]
    Resource(String),
    /// A function or partition spec could not be parsed.
    #[error("spec error: {0}")]
    Spec(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
