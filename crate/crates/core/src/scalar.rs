//! Scalar abstractions.
//!
//! Geometry and linear algebra are written against [`Real`] (`f32`/`f64`).
//! Moment accumulation is written against [`Field`], which additionally
//! admits exact rationals so that merges of partial accumulators can be
//! checked for exact associativity.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive, Zero};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("real converts to f64")
    }

    /// Relative tolerance usable for iterative refinement at this precision.
    fn refine_tol() -> Self {
        Self::of(1e-12).max(Self::epsilon() * Self::of(8.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Field scalar for streaming accumulators. Exact for [`BigRational`].
pub trait Field: Clone + PartialEq + Debug + Num + Send + Sync {
    /// Conversion from a sample value. Exact for every implementor that can
    /// represent all finite `f64` values.
    fn from_sample(x: f64) -> Self;
    fn from_count(n: u64) -> Self;
    fn to_f64_lossy(&self) -> f64;
}

impl Field for f64 {
    fn from_sample(x: f64) -> Self {
        x
    }
    fn from_count(n: u64) -> Self {
        n as f64
    }
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Field for f32 {
    fn from_sample(x: f64) -> Self {
        x as f32
    }
    fn from_count(n: u64) -> Self {
        n as f32
    }
    fn to_f64_lossy(&self) -> f64 {
        f64::from(*self)
    }
}

impl Field for BigRational {
    fn from_sample(x: f64) -> Self {
        BigRational::from_float(x).unwrap_or_else(BigRational::zero)
    }
    fn from_count(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}
