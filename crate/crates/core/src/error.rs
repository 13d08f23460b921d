use thiserror::Error;

/// Errors raised by the numerical kernel, the state/channel layer and the measures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max defect {defect:e})")]
    NonHermitianInput { defect: f64 },
    #[error("iterative solver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("invalid quantum state: {0}")]
    InvalidState(String),
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("quadrature tolerance not met (error estimate {estimate:e}, target {target:e})")]
    ToleranceNotMet { estimate: f64, target: f64 },
    #[error("invalid time grid: {0}")]
    GridError(String),
    #[error("non-finite function value at x = {at}")]
    NumericalError { at: f64 },
    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("map is not invertible (condition number {condition:e})")]
    SingularMap { condition: f64 },
    #[error("rate diverges at t = {t} (q(t) = {q:e})")]
    Singularity { t: f64, q: f64 },
    #[error("singular point t = {t} inside the integration span [{from}, {to}]")]
    SingularityOnGrid { t: f64, from: f64, to: f64 },
    #[error("operation not supported for waiting-time variant {0}")]
    UnsupportedVariant(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
