use thiserror::Error;

/// Errors raised by the estimators and the synthetic oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("covariate dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Every localization weight is zero, so no sample lies in the region of interest.
    #[error("all localization weights are zero; no samples near the point of interest")]
    AllWeightsZero,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("quadrature did not reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    QuadratureFailure { tolerance: f64, estimate: f64 },

    #[error("no sign change found while bracketing root on [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
