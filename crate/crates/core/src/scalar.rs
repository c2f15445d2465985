//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the solvers are generic over: `f32` or `f64`.
///
/// Tolerances in this crate are stated for `f64`. Configuration defaults clamp
/// them to a small multiple of machine epsilon so `f32` runs stay meaningful.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only for values the type cannot hold.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `tol` unless it is finer than `factor` ulps at unit scale.
    #[inline]
    fn tol_floor(tol: f64, factor: f64) -> Self {
        Self::lit(tol).max(Self::epsilon() * Self::lit(factor))
    }
}

impl Real for f32 {}
impl Real for f64 {}
