//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the tuning, dynamics and simulation code is generic over.
///
/// Implemented for `f32` and `f64`. Campaign sampling draws in `f64` and converts,
/// so a given seed yields the same initial states (up to rounding) for either type.
pub trait Scalar:
    Float
    + FromPrimitive
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the type cannot represent finite
    /// `f64` values at all, which is never the case for `f32`/`f64`.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("scalar type cannot represent f64 literal")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Sign function with `sgn(0) = 0`.
///
/// `Float::signum` returns `±1` for `±0.0`, which is not what the control law wants.
#[inline]
pub fn sgn<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}
