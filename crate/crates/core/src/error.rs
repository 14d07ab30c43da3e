use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("pattern parse error at `{token}`: {reason}")]
    Pattern { token: String, reason: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("closed form outside its domain: {0}")]
    Domain(String),

    #[error("fixed point does not exist: {0}")]
    Existence(String),

    #[error("no bifurcation found: {0}")]
    NotFound(String),

    #[error("eigenvalues are real at the crossing (mu = {mu}); not a Hopf point")]
    DegenerateCrossing { mu: f64 },

    #[error("closed form not available for pattern {0}")]
    Unsupported(String),
}

impl Error {
    /// Whether the error stems from user input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Pattern { .. } | Error::InvalidParameter { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
