//! Scalar abstraction: every numerical routine in this crate is generic over
//! the floating-point type through this trait.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, Signed, ToPrimitive};
use rustfft::FftNum;

/// IEEE floating point scalar usable throughout the crate: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Signed
    + Sum<Self>
    + FftNum
    + Debug
    + Default
    + Display
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for converting an `f64` literal into the working scalar type.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal must be representable in the scalar type")
}
