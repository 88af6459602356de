use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates its type invariant (e.g. `alpha` outside `(0, 1)`).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An argument lies outside the domain on which the operation is defined.
    #[error("outside domain: {0}")]
    OutOfDomain(String),

    #[error("empty hypothesis family")]
    EmptyFamily,

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    /// The simulated distribution does not satisfy the hypothesis the
    /// simulation is meant to probe.
    #[error("hypothesis mismatch: {0}")]
    HypothesisMismatch(String),
}
