use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix has odd dimension {0}; phase-space matrices must be 2n x 2n")]
    OddDimension(usize),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("symplectic eigenvalues could not be paired (residual {0:e})")]
    UnpairedSpectrum(f64),

    #[error("unphysical state: {0}")]
    Unphysical(String),

    #[error("quadrature did not converge after {evaluations} evaluations (last change {last_change:e})")]
    NonConvergence { evaluations: usize, last_change: f64 },

    #[error("unsupported integral family: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
