use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("argument out of supported range: {0}")]
    OutOfRange(String),

    #[error("Bessel zero search failed for order {nu}, index {s}: {reason}")]
    ZeroNotFound { nu: f64, s: usize, reason: String },

    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("invalid triangle class: {0}")]
    InvalidTriangleClass(String),

    #[error("outside the validity regime: {0}")]
    Regime(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("polygon too thin for the finite element path (height/diameter = {ratio:.4}); use sandwich bounds instead")]
    ThinDomain { ratio: f64 },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (relative residual {residual:e})")]
    EigenNonConvergence { iterations: usize, residual: f64 },

    #[error("spectrum too short: need {needed} values, have {have}")]
    SpectrumTooShort { needed: usize, have: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("convexity violation for collapse parameter {param}: {message}")]
    Convexity { param: f64, message: String },

    #[error("invalid family descriptor: {0}")]
    Descriptor(String),
}

pub type Result<T> = std::result::Result<T, Error>;
