//! Optimal inversion by phase search over a small prefix-free bit machine.

pub mod bench;
pub mod bits;
pub mod error;
pub mod extrapolate;
pub mod kt;
pub mod machine;
pub mod problems;
pub mod scalar;

pub use bits::BitString;
pub use error::{Error, ParseError, Result};

/// Exact weights for extrapolation.
pub type ExactWeight = num_rational::BigRational;
pub type ExactPrediction = extrapolate::Prediction<ExactWeight>;
pub type FloatPrediction = extrapolate::Prediction<f64>;
