//! Scalar abstraction for the closed-form quantities (threshold exponents,
//! subgraph densities, expected copy counts).
//!
//! The formulas only need field arithmetic and ordering, so they are written
//! once against [`Scalar`] and evaluated either in floating point or exactly
//! over the rationals.

use std::fmt::Debug;

use num_rational::{BigRational, Ratio};
use num_traits::Num;

/// Ordered field element usable by the closed-form routines.
pub trait Scalar: Num + Clone + PartialOrd + Debug {
    fn from_count(n: u64) -> Self;

    fn to_f64(&self) -> f64;

    /// `self^exp` by repeated multiplication.
    fn powu(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Scalar for f64 {
    fn from_count(n: u64) -> Self {
        n as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn powu(&self, exp: u32) -> Self {
        self.powi(exp as i32)
    }
}

impl Scalar for f32 {
    fn from_count(n: u64) -> Self {
        n as f32
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn powu(&self, exp: u32) -> Self {
        self.powi(exp as i32)
    }
}

impl Scalar for Ratio<i64> {
    fn from_count(n: u64) -> Self {
        Ratio::from_integer(i64::try_from(n).expect("count fits in i64"))
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

impl Scalar for BigRational {
    fn from_count(n: u64) -> Self {
        Ratio::from_integer(n.into())
    }

    fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powu_matches_across_scalars() {
        let half = Ratio::new(1i64, 2);
        assert_eq!(half.powu(3), Ratio::new(1, 8));
        assert_eq!(0.5f64.powu(3), 0.125);
        assert_eq!(0.5f32.powu(0), 1.0);
        assert_eq!(BigRational::from_count(3).powu(2), BigRational::from_count(9));
    }

    #[test]
    fn to_f64_of_rational() {
        assert_eq!(Ratio::new(9i64, 20).to_f64(), 0.45);
    }
}
