//! Scalar abstraction: all numerics are generic over the real float type.

use rand::Rng;

/// Floating-point scalar (f32 or f64) with everything the solvers need.
pub trait Float:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + std::iter::Sum
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Draw a uniform sample from `[0, 1)`.
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Float for f32 {
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f32>()
    }
}

impl Float for f64 {
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f64>()
    }
}

/// Shorthand for lowering an `f64` constant into the working scalar type.
#[inline]
pub(crate) fn cast<T: Float>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant representable in scalar type")
}
