//! Scalar abstraction shared by the belief, grounding and regression code.
//!
//! Everything that only needs field arithmetic is written against [`Scalar`],
//! so the same routines run over `f64`, `f32` or exact rationals. Rationals
//! make it possible to check belief arithmetic without rounding.

use std::fmt::Debug;

use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Field-like number usable for probabilities and linear algebra.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Tolerance used when checking that a distribution is normalized.
    /// Exact types return zero.
    fn norm_tolerance() -> Self;

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite value representable in scalar type")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn of_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable in scalar type")
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= Self::norm_tolerance()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn norm_tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn norm_tolerance() -> Self {
        1e-5
    }
}

impl Scalar for Ratio<i64> {
    fn norm_tolerance() -> Self {
        Ratio::from_integer(0)
    }
}

impl Scalar for BigRational {
    fn norm_tolerance() -> Self {
        BigRational::from_integer(0.into())
    }
}

/// Sum of a sequence of scalars.
pub fn sum<S: Scalar>(values: impl IntoIterator<Item = S>) -> S {
    values.into_iter().fold(S::zero(), |acc, v| acc + v)
}

/// `num / den` for small integers, exact when the scalar type allows it.
pub fn ratio<S: Scalar>(num: usize, den: usize) -> S {
    S::of_count(num) / S::of_count(den)
}
