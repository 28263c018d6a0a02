//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Floating-point scalar the toolkit is generic over: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + FftNum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Tolerance on `|‖a‖² - 1|` accepted for a stored state.
    fn normalization_tolerance() -> Self;

    /// Converts an `f64` literal. Every value used by the toolkit is representable.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_index(n: i64) -> Self {
        Self::from_i64(n).expect("index representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn normalization_tolerance() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn normalization_tolerance() -> Self {
        2e-6
    }
}

/// `e^{iθ}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Neumaier-compensated accumulator, so reductions do not depend on summation order
/// beyond the last few ulps.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum<T> {
    sum: T,
    compensation: T,
}

impl<T: Real> KahanSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            compensation: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.add(other.sum);
        self.add(other.compensation);
        self
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.compensation
    }
}

impl<T: Real> FromIterator<T> for KahanSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Wraps an angle into `[-π, π)`.
#[inline]
pub fn wrap_angle<T: Real>(theta: T) -> T {
    let two_pi = T::TAU();
    let shifted = (theta + T::PI()) % two_pi;
    let shifted = if shifted < T::zero() {
        shifted + two_pi
    } else {
        shifted
    };
    let w = shifted - T::PI();
    // `%` can round up to exactly π for inputs a hair below an odd multiple of π.
    if w >= T::PI() {
        w - two_pi
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut acc = KahanSum::<f64>::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        assert!((acc.value() - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn wrap_angle_range() {
        for &x in &[-10.0, -3.2, -std::f64::consts::PI, 0.0, 3.1, std::f64::consts::PI, 7.0] {
            let w = wrap_angle(x);
            assert!((-std::f64::consts::PI..std::f64::consts::PI).contains(&w), "{x} -> {w}");
            let k = ((x - w) / std::f64::consts::TAU).round();
            assert!((x - w - k * std::f64::consts::TAU).abs() < 1e-12);
        }
        assert_eq!(wrap_angle(std::f64::consts::PI), -std::f64::consts::PI);
    }

    #[test]
    fn f32_is_a_real() {
        let c = cis(f32::FRAC_PI_2());
        assert!(c.re.abs() < 1e-6 && (c.im - 1.0).abs() < 1e-6);
    }
}
