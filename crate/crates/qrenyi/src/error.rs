//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("vector norm is {norm}, expected 1")]
    NotNormalized { norm: f64 },

    #[error("matrix is not Hermitian: max |M - M\u{2020}| = {max_dev:.3e}")]
    NotHermitian { max_dev: f64 },

    #[error("trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("eigenvalue {value:.3e} below the PSD tolerance")]
    NegativeEigenvalue { value: f64 },

    #[error("spectrum sums to {sum}, expected 1")]
    SpectrumNotNormalized { sum: f64 },

    #[error("matrix is not unitary: max |U\u{2020}U - I| = {max_dev:.3e}")]
    NotUnitary { max_dev: f64 },

    #[error("invalid Renyi order p = {p}: must be positive")]
    InvalidOrder { p: f64 },

    #[error("invalid weights: {reason}")]
    InvalidWeights { reason: String },

    #[error("{name} = {value} outside valid range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("dimension guard: {0}")]
    DimensionGuard(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
