use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Parameter outside the admissible range (e.g. alpha <= 1, S >= T).
    #[error("domain error: {0}")]
    Domain(String),
    /// Operation-specific precondition not met.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Rejection sampling produced no admissible point.
    #[error("no admissible samples: {0}")]
    EmptySample(String),
    /// Limit extrapolation did not match any supported pattern.
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
