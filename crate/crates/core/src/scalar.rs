//! Scalar abstraction shared by every numerical module.
//!
//! The quantum side of the library is written against [`Real`], which is
//! implemented for `f32` and `f64`. The classical urn and linear-programming
//! machinery is written against [`Field`], which additionally admits exact
//! rationals ([`num_rational::BigRational`]).

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, Signed, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// A tolerance no tighter than what this precision can resolve.
    #[inline]
    fn tol(x: f64) -> Self {
        Self::lit(x).max(Self::epsilon() * Self::lit(64.0))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// An ordered field. Floats satisfy it approximately, rationals exactly.
pub trait Field: Clone + PartialOrd + Signed + NumAssign + Debug + Display {
    fn from_u64(n: u64) -> Self;

    /// Exact conversion for rationals, identity for floats.
    fn from_f64_value(x: f64) -> Option<Self>;

    fn to_f64_value(&self) -> f64;

    /// True when arithmetic is exact, so comparisons against zero need no slack.
    fn is_exact() -> bool;
}

impl Field for f64 {
    fn from_u64(n: u64) -> Self {
        n as f64
    }
    fn from_f64_value(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
    fn to_f64_value(&self) -> f64 {
        *self
    }
    fn is_exact() -> bool {
        false
    }
}

impl Field for BigRational {
    fn from_u64(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn from_f64_value(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }
    fn to_f64_value(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn is_exact() -> bool {
        true
    }
}

/// Exact rational scalar.
pub type Rational = BigRational;
