//! Error type shared by all solver modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("shape mismatch: expected {expected} nodal values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("solver did not converge: {0}")]
    NoConvergence(String),
}
