//! Coefficient fields.
//!
//! Polynomials and rational functions are generic over an exact field. The
//! engine itself runs over arbitrary-precision rationals ([`crate::Q`]); the
//! machine-word rationals are useful for small experiments and tests.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, Zero};

/// An exact field usable as a coefficient domain.
///
/// Floating point types deliberately do not implement this trait: every
/// decision made by the engine is "is this expression identically zero",
/// which only makes sense with exact arithmetic.
pub trait Field:
    Clone
    + Debug
    + Display
    + PartialEq
    + Eq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_i64(value: i64) -> Self;

    /// Sign used when printing; `true` for strictly negative values.
    fn is_negative(&self) -> bool;
}

impl Field for BigRational {
    fn from_i64(value: i64) -> Self {
        BigRational::from_integer(BigInt::from(value))
    }

    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
}

impl Field for Rational64 {
    fn from_i64(value: i64) -> Self {
        Rational64::from_integer(value)
    }

    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
}
