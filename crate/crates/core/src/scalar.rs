//! Scalar abstraction for the statistical core.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Numeric type usable for partition statistics and I-scores.
///
/// Implemented for `f32`, `f64` and [`crate::Exact`] (big rationals). Values
/// that enter a dataset must be finite; under that invariant `PartialOrd` is
/// total and [`Scalar::cmp_total`] never falls back.
pub trait Scalar:
    Num + Signed + FromPrimitive + ToPrimitive + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    fn is_finite_value(&self) -> bool;

    fn cmp_total(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).unwrap_or(Ordering::Equal)
    }

    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f32 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for num_rational::BigRational {
    fn is_finite_value(&self) -> bool {
        true
    }
}
