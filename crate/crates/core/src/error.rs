use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("eigenvalue iteration did not converge")]
    EigenNoConvergence,

    #[error("steady state is not unique: second-smallest singular value {gap:.3e} below {threshold:.1e}")]
    NonUniqueSteadyState { gap: f64, threshold: f64 },

    #[error("steady-state solve failed: {reason} (residual {residual:.3e})")]
    NoConvergence { reason: String, residual: f64 },

    #[error("integration drift {drift:.3e} at t = {time} exceeds {tolerance:.1e}; reduce the step size")]
    StepSizeTooLarge {
        time: f64,
        drift: f64,
        tolerance: f64,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
