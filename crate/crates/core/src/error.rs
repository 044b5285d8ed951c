use thiserror::Error;

/// Errors raised by generators, divergences, families and the numerical oracle.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("dominance condition violated: {0}")]
    Dominance(String),

    #[error("skew parameter alpha = {0} is outside the open interval (0, 1)")]
    Alpha(f64),

    #[error("x = {0} is outside the support")]
    Support(f64),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("family mismatch: {0} vs {1}")]
    FamilyMismatch(String, String),

    #[error("no closed form registered for the pair ({0}, {1})")]
    UnsupportedPair(String, String),

    #[error("families are not nested: {0}")]
    Nesting(String),

    #[error("degenerate truncation: {0}")]
    Degenerate(String),

    #[error("oracle tolerance not reached: value {value} with error estimate {abs_error_estimate:e}")]
    Tolerance { value: f64, abs_error_estimate: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
