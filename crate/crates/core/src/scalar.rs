use num_traits::{Float, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display, LowerExp};

/// Floating point type the solvers are written against.
///
/// Implemented for `f32` and `f64`. Everything in this crate is generic over
/// `Scalar`; the crate root exports `f64` aliases for the common case.
pub trait Scalar:
    'static
    + Copy
    + Send
    + Sync
    + Float
    + NumAssign
    + FromPrimitive
    + Default
    + Debug
    + Display
    + LowerExp
{
    /// Converts an `f64` literal. Panics only if the target type cannot
    /// represent finite `f64` constants, which never happens for f32/f64.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("scalar literal")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("scalar count")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
