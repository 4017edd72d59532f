//! Minimal real-number abstraction so closed-form jets and residual formulas
//! can be evaluated either in `f64` or in double-double (`TwoFloat`).
//!
//! Residuals of the explicit solutions are cancellations of terms that grow
//! like `(T - t - |x|)^-4`; near the lightcone tip the terms reach 1e8 and plain
//! `f64` cannot resolve a zero residual below ~1e-8. Evaluating the same
//! formulas in double-double removes that floor.

use std::ops::{Add, Div, Mul, Neg, Sub};

use twofloat::TwoFloat;

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + PartialOrd
{
    fn of(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;

    fn zero() -> Self {
        Self::of(0.0)
    }

    fn one() -> Self {
        Self::of(1.0)
    }

    fn sq(self) -> Self {
        self * self
    }
}

impl Scalar for f64 {
    #[inline]
    fn of(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self
    }

    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

impl Scalar for TwoFloat {
    #[inline]
    fn of(x: f64) -> Self {
        TwoFloat::from(x)
    }

    #[inline]
    fn to_f64(self) -> f64 {
        f64::from(self)
    }

    #[inline]
    fn sqrt(self) -> Self {
        TwoFloat::sqrt(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_double_resolves_below_f64_epsilon() {
        let one = TwoFloat::of(1.0);
        let tiny = TwoFloat::of(1e-20);
        let diff = (one + tiny) - one;
        assert!((diff.to_f64() - 1e-20).abs() < 1e-30);
        assert_eq!((1.0f64 + 1e-20) - 1.0, 0.0);
    }

    #[test]
    fn sqrt_agrees() {
        let x = TwoFloat::of(2.0).sqrt();
        assert!((x.to_f64() - std::f64::consts::SQRT_2).abs() < 1e-16);
        assert!(((x * x) - TwoFloat::of(2.0)).to_f64().abs() < 1e-30);
    }
}
