use thiserror::Error;

/// Errors raised by the field, reflection, validation and experiment routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error(
        "quadrature did not converge after {depth} halvings \
         (best estimate {best}, error estimate {est_error:e})"
    )]
    NonConvergence {
        depth: u32,
        best: f64,
        est_error: f64,
    },

    #[error("grid too coarse: {points} points, at least {min} required")]
    GridTooCoarse { points: usize, min: usize },

    #[error("invalid scenario: {0}")]
    Scenario(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
