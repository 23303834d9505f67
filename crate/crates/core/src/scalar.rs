//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};
use std::str::FromStr;

/// Floating point scalar: `f32` or `f64`.
pub trait Scalar:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Exact for `f64`, rounded for `f32`.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// `ln(1 + e^u)` without overflow for large `u`.
    #[inline]
    fn softplus(self) -> Self {
        if self > Self::zero() {
            self + (-self).exp().ln_1p()
        } else {
            self.exp().ln_1p()
        }
    }

    /// Logistic sigmoid, the derivative of [`Scalar::softplus`].
    #[inline]
    fn sigmoid(self) -> Self {
        if self >= Self::zero() {
            Self::one() / (Self::one() + (-self).exp())
        } else {
            let e = self.exp();
            e / (Self::one() + e)
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softplus_matches_naive_in_safe_range() {
        for &u in &[-20.0f64, -3.0, -0.5, 0.0, 0.5, 3.0, 20.0] {
            let naive = (1.0 + u.exp()).ln();
            assert!((u.softplus() - naive).abs() < 1e-12, "u={u}");
        }
        assert_eq!(0.0f64.softplus(), std::f64::consts::LN_2);
        assert!((800.0f64).softplus().is_finite());
        assert!((-800.0f64).softplus() >= 0.0);
    }

    #[test]
    fn sigmoid_is_softplus_derivative() {
        for &u in &[-4.0f64, -1.0, 0.0, 0.7, 5.0] {
            let h = 1e-6;
            let fd = ((u + h).softplus() - (u - h).softplus()) / (2.0 * h);
            assert!((fd - u.sigmoid()).abs() < 1e-8);
        }
    }
}
