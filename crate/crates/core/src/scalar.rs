use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for literals and sampled values.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Ordered field used by the exact volume formulas. Implemented for the float
/// types and for `Ratio<BigInt>`.
pub trait Field: Clone + PartialOrd + Num + Neg<Output = Self> + Debug {
    fn from_ratio(r: &Ratio<BigInt>) -> Self;

    fn from_int(k: i64) -> Self {
        Self::from_ratio(&Ratio::from_integer(BigInt::from(k)))
    }

    fn to_f64_approx(&self) -> f64;
}

impl Field for f64 {
    fn from_ratio(r: &Ratio<BigInt>) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn to_f64_approx(&self) -> f64 {
        *self
    }
}

impl Field for f32 {
    fn from_ratio(r: &Ratio<BigInt>) -> Self {
        r.to_f32().unwrap_or(f32::NAN)
    }

    fn to_f64_approx(&self) -> f64 {
        *self as f64
    }
}

impl Field for Ratio<BigInt> {
    fn from_ratio(r: &Ratio<BigInt>) -> Self {
        r.clone()
    }

    fn to_f64_approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}
