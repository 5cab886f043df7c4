//! Floating-point abstraction shared by every numerical module.

use std::fmt::{Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst};
use rustfft::FftNum;

/// Real scalar type the solver and its checkers are generic over.
///
/// Implemented for `f32` and `f64`. Tolerances quoted throughout the crate
/// (1e-12 round trips and the like) assume `f64`.
pub trait Scalar:
    FftNum + Float + FloatConst + Display + LowerExp + Sum + Default + 'static
{
    /// Converts an `f64` literal or computed constant into `Self`.
    fn lit(x: f64) -> Self;

    /// Lossless-or-rounded conversion back to `f64`, for reporting.
    fn to_f64_lossy(self) -> f64;

    /// Converts a count or index.
    fn from_usize_lossy(n: usize) -> Self {
        Self::lit(n as f64)
    }
}

impl Scalar for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}
