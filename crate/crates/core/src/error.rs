use thiserror::Error;

/// Failures reported by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The parameters do not stabilize the iteration (or flow) for the given spectrum.
    #[error("unstable: {0}")]
    Unstable(String),
    /// A numerical procedure failed; the message carries diagnostics.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// A deterministic run did not reach the requested accuracy.
    #[error("no convergence to the requested accuracy within {steps} steps")]
    Timeout { steps: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn unstable(msg: impl Into<String>) -> Error {
    Error::Unstable(msg.into())
}
