use thiserror::Error;

/// Errors produced by the dynamics, oracle and witness routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    InvalidInput { field: String, reason: String },

    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("step budget exhausted at t = {t}")]
    TooManySteps { t: f64 },

    #[error("quadrature did not converge: error estimate {estimate:e} exceeds tolerance {tol:e}")]
    QuadratureNonConvergence { estimate: f64, tol: f64 },

    #[error("interval contains a non-regular rate sample at t = {t}")]
    SingularSpan { t: f64 },

    #[error("profile: {0}")]
    Profile(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Time at which a numerical failure occurred, if the error carries one.
    pub fn failing_time(&self) -> Option<f64> {
        match self {
            Error::StepSizeUnderflow { t }
            | Error::TooManySteps { t }
            | Error::SingularSpan { t } => Some(*t),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
