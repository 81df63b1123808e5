use thiserror::Error;

/// Failure modes shared across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("measure has zero total mass")]
    ZeroMass,
    #[error("multiplicator vanishes at atom location {location}")]
    ZeroCharge { location: f64 },
    #[error("function is not in the multiplicator group: {0}")]
    NotInGroup(String),
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("integral diverges: {0}")]
    DivergentIntegral(String),
    #[error("tail mass {achieved:e} above cap {cap:e} after {atoms} atoms")]
    TruncationOverflow { achieved: f64, cap: f64, atoms: usize },
    #[error("need at least {needed} terms, got {got}")]
    InsufficientTerms { needed: usize, got: usize },
    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),
    #[error("zero-norms differ: {left} vs {right}")]
    NormMismatch { left: f64, right: f64 },
    #[error("evaluation failed: {0}")]
    EvaluationError(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
