use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structurally invalid request (empty input, bad count, bad tolerance).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An iterative method ran out of budget before meeting its tolerance.
    #[error("no convergence: {0}")]
    NonConvergence(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn no_convergence(msg: impl Into<String>) -> Self {
        Error::NonConvergence(msg.into())
    }
}
