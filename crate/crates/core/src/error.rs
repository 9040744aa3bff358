use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// (p,q) or (alpha,beta) outside the supported parameter regimes.
    #[error("invalid parameters: {0}")]
    Regime(String),
    /// A precondition on a target function was not met (missing derivative,
    /// non-convex input to a convexity check, ...).
    #[error("contract violation: {0}")]
    Contract(String),
    /// The requested computation is not available in this numeric mode.
    #[error("numeric mode: {0}")]
    Mode(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn regime(msg: impl Into<String>) -> Self {
        Error::Regime(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
