use thiserror::Error;

/// Errors surfaced by operator-algebra and hierarchy operations.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A label or shape precondition was violated.
    #[error("domain error: {0}")]
    Domain(String),
    /// The request exceeds the supported particle-number or ground-set envelope.
    #[error("capacity error: {0}")]
    Capacity(String),
    /// A state sequence normalizes to zero.
    #[error("degenerate state: {0}")]
    DegenerateState(String),
    /// A time integration blew up.
    #[error("divergence: {0}")]
    Divergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn capacity(msg: impl Into<String>) -> Error {
    Error::Capacity(msg.into())
}
