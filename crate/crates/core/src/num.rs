//! Scalar abstraction shared by the geometry, mobility and statistics code.

use std::fmt::Debug;

/// Floating point scalar: `f32` or `f64`.
pub trait Scalar:
    num_traits::Float + num_traits::FromPrimitive + num_traits::NumCast + Debug + Default + Send + Sync
{
    /// Lossy conversion from `f64`, used for configuration constants.
    fn of(v: f64) -> Self {
        <Self as num_traits::NumCast>::from(v).expect("constant representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
