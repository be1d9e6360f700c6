use thiserror::Error;

/// Errors raised by the numerical kernels and the simulation driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("path blew up at step {step} (t = {t}): {reason}")]
    BlowUp { step: usize, t: f64, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Field-level configuration errors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },

    #[error("alpha outside (0,1/9): alpha = {alpha}; global existence is only guaranteed inside this window")]
    AlphaOutsideWindow { alpha: f64 },

    #[error("condition on (d, q, alpha) violated: d = {dim}, q = {q}, alpha = {alpha}")]
    ConditionViolated { dim: usize, q: f64, alpha: f64 },

    #[error("nonlinearity must be a cubic with positive leading coefficient, got a3 = {0}")]
    NonCoerciveNonlinearity(f64),
}

impl ConfigError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
