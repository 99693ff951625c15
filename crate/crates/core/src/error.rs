use thiserror::Error;

use crate::kernel::DivergenceWitness;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("covariance is not symmetric positive definite: {0}")]
    NonSpdCovariance(String),

    #[error("dimension mismatch: expected {expected}, found {found} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("variance box does not contain the estimate: {0}")]
    InconsistentBox(String),

    #[error("eigenvalue cap {cap} is below the largest eigenvalue {max_eigenvalue} of the covariance")]
    CapBelowSpectrum { cap: f64, max_eigenvalue: f64 },

    #[error("Frobenius radius {delta} must lie in [0, {min_eigenvalue}) (smallest covariance eigenvalue)")]
    DeltaTooLarge { delta: f64, min_eigenvalue: f64 },

    #[error("invalid drift ambiguity radius: {0}")]
    BadEpsilon(String),

    #[error("invalid preferences: {0}")]
    BadPreferences(String),

    #[error("unsupported volatility ambiguity variant for this operation: {0}")]
    UnsupportedVariant(&'static str),

    #[error("horizon mismatch: {0}")]
    HorizonMismatch(String),

    #[error("preference mismatch: {0}")]
    PreferenceMismatch(String),

    #[error("portfolio must be nonzero")]
    ZeroPortfolio,

    #[error("problem is ill-posed: gamma_eps = {gamma_eps} <= 0 ({witness})")]
    IllPosed {
        gamma_eps: f64,
        witness: DivergenceWitness,
    },

    #[error("fixed-point iteration did not converge after {iterations} iterations (last step {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("unknown simulation scheme '{0}' (expected 'euler' or 'exact-log')")]
    InvalidScheme(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
