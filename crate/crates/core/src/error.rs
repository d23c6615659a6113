use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum UqError {
    /// An argument lies outside the domain of the function or family.
    #[error("domain error: {0}")]
    Domain(String),
    /// Incompatible arguments (e.g. a KL divergence across two families).
    #[error("usage error: {0}")]
    Usage(String),
    /// A required moment of the second-order distribution is infinite.
    #[error("diverging moment: {0}")]
    DivergingMoment(String),
    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("integration did not converge: {message} (best estimate {best_estimate})")]
    Integration { best_estimate: f64, message: String },
    /// A transformation would leave the parameter space.
    #[error("constraint violated: {0}")]
    Constraint(String),
    /// The operation is not implemented for this combination of laws.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A configuration value is missing or malformed.
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },
}

impl UqError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        UqError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the caller's input rather than by numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            UqError::Usage(_) | UqError::Config { .. } | UqError::Domain(_) | UqError::Constraint(_)
        )
    }
}

pub type Result<T, E = UqError> = std::result::Result<T, E>;
