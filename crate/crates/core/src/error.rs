use thiserror::Error;

/// Failure modes shared by every analysis routine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A modelling assumption required by the formula does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The inputs make the requested construction meaningless (e.g. parallel channels).
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// The closed form exists only for a narrower geometry than the one supplied.
    #[error("outside closed-form scope: {0}")]
    Scope(String),
    /// The result is finite mathematically but not representable in f64.
    #[error("overflow: {0}")]
    Overflow(String),
    /// An iterative method failed to converge or a root could not be bracketed.
    #[error("numerical failure: {message} (residual {residual:.3e})")]
    Numerical { message: String, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
