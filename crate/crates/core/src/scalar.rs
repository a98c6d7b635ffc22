use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};

/// Real number type the deployment model is written against.
///
/// Implemented for `f32` and `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssignOps
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal; panics only for values the type cannot hold.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("literal not representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count not representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Ceiling that treats values within `1e-9` of an integer as that integer,
    /// so `0.3 * 10` rounds to 3 instead of 4.
    #[inline]
    fn ceil_to_usize(self) -> usize {
        let x = self.as_f64();
        let r = x.round();
        let c = if (x - r).abs() <= 1e-9 { r } else { x.ceil() };
        if c <= 0.0 {
            0
        } else {
            c as usize
        }
    }

    /// Tolerance for the weight-sum check: `1e-9`, or a few ulps when the
    /// type is coarser than that.
    #[inline]
    fn weight_sum_tolerance() -> Self {
        let eps = Self::epsilon() * Self::lit(8.0);
        let tol = Self::lit(1e-9);
        if eps > tol {
            eps
        } else {
            tol
        }
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssignOps
        + Default
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}
