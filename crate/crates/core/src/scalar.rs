//! Scalar abstractions.
//!
//! Two families are used: [`Real`] for everything that lives on a grid (norms,
//! transforms, time stepping) and [`ExactScalar`] for the exponent algebra, which
//! is a rational function of the model parameters and can run on
//! [`num_rational::BigRational`] as well as on floats.

use std::fmt::{Debug, Display, LowerExp};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive, Zero};
use rustfft::FftNum;

/// Floating point type usable by the grid, kernels and integrators (`f32`, `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only on values that cannot be represented at all.
    #[inline]
    fn cst(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon scaled into a practical round-off floor.
    fn roundoff() -> Self {
        Self::epsilon() * Self::cst(64.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Scalar for the exponent calculus: a field with ordering, so rationals work.
pub trait ExactScalar:
    Clone + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Debug + Display
{
    /// Absolute tolerance used when checking algebraic identities (zero for exact types).
    fn identity_tolerance() -> Self;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable")
    }

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).expect("int") / Self::from_i64(den).expect("int")
    }

    fn approx_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `true` when `a` and `b` agree to the type's identity tolerance, relative to
    /// `max(1, |a|, |b|)`.
    fn agrees(a: &Self, b: &Self) -> bool {
        let diff = (a.clone() - b.clone()).abs();
        let mut scale = Self::one();
        if a.abs() > scale {
            scale = a.abs();
        }
        if b.abs() > scale {
            scale = b.abs();
        }
        diff <= Self::identity_tolerance() * scale
    }
}

impl ExactScalar for f64 {
    fn identity_tolerance() -> Self {
        1e-12
    }
}

impl ExactScalar for f32 {
    fn identity_tolerance() -> Self {
        1e-5
    }
}

impl ExactScalar for BigRational {
    fn identity_tolerance() -> Self {
        BigRational::zero()
    }

    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

/// Grid scalars that can also drive the exponent algebra (`f32`, `f64`).
pub trait Numeric: Real + ExactScalar {}

impl<T: Real + ExactScalar> Numeric for T {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_identity_is_exact() {
        let third = BigRational::ratio(1, 3);
        let sum = third.clone() + third.clone() + third;
        assert!(BigRational::agrees(&sum, &BigRational::ratio(1, 1)));
        assert!(!BigRational::agrees(
            &BigRational::ratio(1, 3),
            &BigRational::lit(1.0 / 3.0)
        ));
    }

    #[test]
    fn float_agreement_is_relative() {
        assert!(f64::agrees(&1e6, &(1e6 + 1e-7)));
        assert!(!f64::agrees(&1.0, &1.000_001));
    }
}
