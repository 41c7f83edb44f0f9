//! Scalar abstraction shared by the flow, shrinking and pricing kernels.
//!
//! The solver itself runs on `f64` because that is what the LP backend
//! returns, but the combinatorial kernels only need ordered field
//! arithmetic, so they are written once against [`Scalar`] and can be
//! exercised with exact rationals in tests.

use std::fmt::Debug;

use num_rational::Rational64;
use num_traits::{FromPrimitive, NumAssign, Signed, ToPrimitive};

/// Ordered field element usable as a capacity, LP value or dual.
pub trait Scalar:
    NumAssign + Signed + Copy + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Values at or below this magnitude are treated as zero by the kernels.
    fn tolerance() -> Self;

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite value")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_usize(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("representable count")
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn is_positive_tol(self) -> bool {
        self > Self::tolerance()
    }

    fn approx_eq(self, other: Self) -> bool {
        (self - other).abs() <= Self::tolerance()
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
    fn tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-5
    }
}

impl Scalar for Rational64 {
    fn tolerance() -> Self {
        Rational64::from_integer(0)
    }
}

/// Sum a sequence of scalars.
pub fn sum<T: Scalar>(it: impl IntoIterator<Item = T>) -> T {
    it.into_iter().fold(T::zero(), |acc, v| acc + v)
}
