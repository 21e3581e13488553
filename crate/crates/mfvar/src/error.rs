//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by the samplers, model builders and I/O surfaces.
#[derive(Debug, Error)]
pub enum MfError {
    /// Operand shapes do not conform.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A Cholesky pivot fell below the numeric floor; the matrix is
    /// singular or indefinite (e.g. a non-identified missing block).
    #[error("matrix not positive definite at pivot {pivot} (value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    /// Panel mask is inconsistent with the declared block structure.
    #[error("mask inconsistent: {0}")]
    MaskInconsistent(String),

    /// The constraint Gram matrix M_a K^-1 M_a' is rank deficient
    /// (redundant constraint rows).
    #[error("constraint system singular: W = M_a K^-1 M_a' is rank deficient")]
    SingularW,

    /// X'X plus the prior precision is not positive definite.
    #[error("singular design: X'X + prior precision not positive definite")]
    SingularDesign,

    /// Summary requested on an empty draw store.
    #[error("empty draw store")]
    EmptyStore,

    /// A predicted filter covariance lost positive semi-definiteness.
    #[error("Kalman filter divergence at step {0}")]
    FilterDivergence(usize),

    /// Companion matrix has spectral radius at or above one.
    #[error("VAR is non-stationary: companion spectral radius {0} >= 1")]
    NonStationary(f64),

    /// CSV input failed to parse; locations are 1-based.
    #[error("parse error at row {row}, column {col}: {msg}")]
    ParseError { row: usize, col: usize, msg: String },

    /// Configuration key missing or malformed.
    #[error("config error: {0}")]
    ConfigError(String),

    /// Sampler failure with the Gibbs draw index attached.
    #[error("draw {draw}: {source}")]
    AtDraw {
        draw: usize,
        #[source]
        source: Box<MfError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, MfError>;
