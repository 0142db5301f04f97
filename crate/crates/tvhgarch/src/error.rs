//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by model construction, filtering, estimation and testing.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or argument is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Model orders (p, q) not supported by the requested operation.
    #[error("unsupported orders: {0}")]
    UnsupportedOrders(String),

    /// A numerical computation failed (non-finite values, positivity floor).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The series carries no usable variation.
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// Not enough observations for the requested operation.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The outer-product information matrix cannot be inverted.
    #[error("singular information matrix: {0}")]
    SingularInformation(String),

    /// The score test denominator is not positive; no p-value is available.
    #[error("score test unavailable: {0}")]
    DegenerateTest(String),
}

pub type Result<T> = std::result::Result<T, Error>;
