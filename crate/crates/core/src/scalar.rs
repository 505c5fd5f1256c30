//! Floating-point element types for embedding storage and similarity math.

use num_traits::Float;

/// Element type of an embedding vector.
///
/// Dot products always accumulate in `f64`, so a store of `f32` vectors and a
/// store of `f64` vectors built from the same file rank candidates identically
/// up to rounding of the stored elements.
pub trait Scalar: Float + Default + Send + Sync + std::fmt::Debug + 'static {
    fn widen(self) -> f64;
    fn narrow(value: f64) -> Self;
}

impl Scalar for f32 {
    #[inline(always)]
    fn widen(self) -> f64 {
        self as f64
    }

    #[inline(always)]
    fn narrow(value: f64) -> Self {
        value as f32
    }
}

impl Scalar for f64 {
    #[inline(always)]
    fn widen(self) -> f64 {
        self
    }

    #[inline(always)]
    fn narrow(value: f64) -> Self {
        value
    }
}
