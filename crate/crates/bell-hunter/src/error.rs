//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimensionMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("{op} expects a {expected}x{expected} matrix, got {rows}x{cols}")]
    WrongSize {
        op: &'static str,
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("eigendecomposition supports 2x2, 3x3 and 4x4 matrices, got {rows}x{cols}")]
    UnsupportedSize { rows: usize, cols: usize },

    #[error("matrix is not Hermitian within tolerance {tol:e} (max deviation {deviation:e})")]
    NotHermitian { tol: f64, deviation: f64 },

    #[error("Jacobi sweep did not converge within {sweeps} sweeps (off-diagonal norm {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("{name} = {value} outside valid range [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("setting block has zero norm")]
    ZeroNormBlock,

    #[error("matrix is not a valid density matrix: {reason}")]
    InvalidDensityMatrix { reason: String },

    #[error("{0} must not be empty")]
    EmptyInput(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("objective evaluation failed: {0}")]
    Objective(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON input: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
