//! Scalar types for probability weights.
//!
//! Weights are dyadic (`2^-e`), so they are exact in [`BigRational`]; the
//! float impls exist for quick approximate runs.

use std::fmt::Debug;
use std::ops::{Add, Div};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub trait Weight: Clone + Debug + PartialOrd + Zero + One + Add<Output = Self> + Div<Output = Self> + Send + Sync {
    /// `2^-exp`.
    fn dyadic(exp: u32) -> Self;

    fn to_f64(&self) -> f64;

    /// `(numerator, denominator)` in lowest terms when the type is exact.
    fn as_fraction(&self) -> Option<(BigInt, BigInt)> {
        None
    }
}

impl Weight for f64 {
    fn dyadic(exp: u32) -> Self {
        (-(exp as f64)).exp2()
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Weight for f32 {
    fn dyadic(exp: u32) -> Self {
        (-(exp as f32)).exp2()
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
}

impl Weight for BigRational {
    fn dyadic(exp: u32) -> Self {
        BigRational::new(BigInt::one(), BigInt::one() << exp as usize)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn as_fraction(&self) -> Option<(BigInt, BigInt)> {
        Some((self.numer().clone(), self.denom().clone()))
    }
}
