//! Scalar abstraction for the numeric core.
//!
//! All model arithmetic is generic over a floating-point scalar so the same
//! code runs in `f32` or `f64`. The CLI and the shipped defaults use `f64`
//! (see the aliases at the crate root).

use std::fmt::{Debug, Display};

use num_traits::Float;

/// Floating-point scalar usable throughout the cost model, planner, and
/// emulator front-end.
pub trait Scalar: Float + Debug + Display + Send + Sync + 'static {}

impl<T> Scalar for T where T: Float + Debug + Display + Send + Sync + 'static {}

/// Converts an `f64` into the working scalar type.
///
/// Panics if the value is not representable (e.g. an overflowing `f32`
/// conversion), which indicates a misconfigured profile rather than a
/// recoverable runtime condition.
pub fn from_f64<T: Scalar>(value: f64) -> T {
    T::from(value).expect("value not representable in the chosen scalar type")
}

/// Converts the working scalar into `f64` (used by the emulator clock).
pub fn to_f64<T: Scalar>(value: T) -> f64 {
    value.to_f64().expect("scalar not representable as f64")
}
