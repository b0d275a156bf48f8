//! Coefficient rings usable in truncated tensor series.

use core::ops::{Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Commutative coefficient ring with exact embeddings of small rationals.
///
/// `from_ratio` supplies the series coefficients 1/k! and (-1)^(k+1)/k used
/// by the truncated exponential and logarithm; rings that cannot represent
/// them exactly (e.g. `f64`) round.
pub trait Coeff: Clone + PartialEq + Zero + One + Neg<Output = Self> + Sub<Output = Self> {
    fn from_ratio(num: i64, den: u64) -> Self;
}

impl Coeff for f64 {
    fn from_ratio(num: i64, den: u64) -> Self {
        num as f64 / den as f64
    }
}

impl Coeff for BigRational {
    fn from_ratio(num: i64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}
