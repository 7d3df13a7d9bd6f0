//! Scalar abstraction for the special-function kernel.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real floating-point scalar accepted by the elliptic-function kernel.
///
/// Implemented for `f32` and `f64`. Every tolerance in the crate is
/// expressed in `f64` and converted with [`Real::c`], so a type with more
/// precision than `f64` simply gets the `f64` tolerances.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("representable constant")
    }

    /// Converts a small integer.
    #[inline]
    fn ci(n: i64) -> Self {
        Self::from_i64(n).expect("representable integer")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
