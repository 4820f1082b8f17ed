//! Scalar abstraction so the moment/weight pipeline can run in `f64` for
//! real kernels and in `Complex64` for the oscillatory ones.

use num_complex::Complex64;
use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub};

/// Field element used for moments, alpha matrices and expansion
/// coefficients: either `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + MulAssign
    + Sum
    + ndarray::LinalgScalar
{
    const ZERO: Self;
    const ONE: Self;
    /// Whether this scalar can carry an imaginary part.
    const IS_COMPLEX: bool;

    fn from_re(x: f64) -> Self;
    /// Narrowing conversion; panics if a nonzero imaginary part would be
    /// dropped.
    fn from_complex(z: Complex64) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn conj(self) -> Self;
    /// Squared modulus as a real number.
    fn abs_sq(self) -> f64;
    /// Scale by a real factor.
    fn scale(self, x: f64) -> Self;

    fn abs(self) -> f64 {
        self.abs_sq().sqrt()
    }

    fn to_complex(self) -> Complex64 {
        Complex64::new(self.re(), self.im())
    }
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    const IS_COMPLEX: bool = false;

    fn from_re(x: f64) -> Self {
        x
    }
    fn from_complex(z: Complex64) -> Self {
        assert!(z.im == 0.0, "dropping imaginary part {} in real pipeline", z.im);
        z.re
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
    fn conj(self) -> Self {
        self
    }
    fn abs_sq(self) -> f64 {
        self * self
    }
    fn scale(self, x: f64) -> Self {
        self * x
    }
}

impl Scalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    const ONE: Self = Complex64::new(1.0, 0.0);
    const IS_COMPLEX: bool = true;

    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn from_complex(z: Complex64) -> Self {
        z
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
    fn conj(self) -> Self {
        Complex64::new(self.re, -self.im)
    }
    fn abs_sq(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
    fn scale(self, x: f64) -> Self {
        Complex64::new(self.re * x, self.im * x)
    }
}

/// Pairwise (cascade) summation of a slice; keeps accumulated rounding at
/// O(log n) regardless of length and is independent of thread scheduling.
pub fn pairwise_sum<T: Scalar>(xs: &[T]) -> T {
    if xs.len() <= 32 {
        let mut acc = T::ZERO;
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
