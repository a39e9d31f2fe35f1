//! Scalar abstractions shared by the model, correction and fitting code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the value is not representable,
    /// which cannot happen for finite literals in `f32`/`f64`.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Field arithmetic without transcendental functions.
///
/// The closed-form corrections only need `+ - * /` and ordering, so they are
/// also available over exact rationals such as `num_rational::Ratio<i64>`.
pub trait Field: Num + Copy + PartialOrd + Debug {}

impl<T: Num + Copy + PartialOrd + Debug> Field for T {}

#[inline]
pub(crate) fn two<T: Field>() -> T {
    T::one() + T::one()
}
