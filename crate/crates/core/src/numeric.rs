//! Scalar abstraction: `f64`/`Complex64` for production arithmetic and exact
//! rationals for the identities that hold without rounding.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::traits::{Signed, ToPrimitive, Zero};

/// Real weight type for measures and probabilities.
///
/// Implemented by `f64` (tolerance-based comparisons) and `BigRational`
/// (exact mode, zero tolerances).
pub trait Weight:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    /// True when arithmetic is exact and tolerances must collapse to zero.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
    fn div(self, rhs: Self) -> Self;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    /// Negativity threshold used by realizability verdicts: a reconstructed
    /// weight counts as negative only below `-tol(scale)`.
    fn realizability_tol(scale: &Self) -> Self;
}

impl Weight for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn div(self, rhs: Self) -> Self {
        self / rhs
    }
    fn realizability_tol(scale: &Self) -> Self {
        1e-9 * f64::abs(*scale).max(1.0)
    }
}

impl Weight for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as num::traits::One>::one()
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn div(self, rhs: Self) -> Self {
        self / rhs
    }
    fn realizability_tol(_scale: &Self) -> Self {
        <Self as Weight>::zero()
    }
}

/// Complex scalar for quasi-observables and their transforms.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    type Real: Weight;

    fn zero() -> Self;
    fn one() -> Self;
    fn conj(&self) -> Self;
    fn from_real(re: Self::Real) -> Self;
    fn re(&self) -> Self::Real;
    fn im(&self) -> Self::Real;
    /// Exact division by a nonzero integer.
    fn div_int(self, k: i64) -> Self;
    /// Modulus as `f64`, for tolerance checks and reporting.
    fn modulus(&self) -> f64;

    fn from_int(k: i64) -> Self {
        Self::from_real(Self::Real::from_ratio(k, 1))
    }
    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }
}

impl Scalar for Complex64 {
    type Real = f64;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn from_real(re: f64) -> Self {
        Complex64::new(re, 0.0)
    }
    fn re(&self) -> f64 {
        self.re
    }
    fn im(&self) -> f64 {
        self.im
    }
    fn div_int(self, k: i64) -> Self {
        self / k as f64
    }
    fn modulus(&self) -> f64 {
        self.norm()
    }
}

/// Complex number with exact rational components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatComplex {
    pub re: BigRational,
    pub im: BigRational,
}

impl RatComplex {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        RatComplex { re, im }
    }

    pub fn from_ratios(re: (i64, i64), im: (i64, i64)) -> Self {
        RatComplex::new(
            <BigRational as Weight>::from_ratio(re.0, re.1),
            <BigRational as Weight>::from_ratio(im.0, im.1),
        )
    }
}

impl Add for RatComplex {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        RatComplex::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for RatComplex {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        RatComplex::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Mul for RatComplex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let re = self.re.clone() * rhs.re.clone() - self.im.clone() * rhs.im.clone();
        let im = self.re * rhs.im + self.im * rhs.re;
        RatComplex::new(re, im)
    }
}

impl Neg for RatComplex {
    type Output = Self;
    fn neg(self) -> Self {
        RatComplex::new(-self.re, -self.im)
    }
}

impl Scalar for RatComplex {
    type Real = BigRational;

    fn zero() -> Self {
        RatComplex::new(<BigRational as Weight>::zero(), <BigRational as Weight>::zero())
    }
    fn one() -> Self {
        RatComplex::new(<BigRational as Weight>::one(), <BigRational as Weight>::zero())
    }
    fn conj(&self) -> Self {
        RatComplex::new(self.re.clone(), -self.im.clone())
    }
    fn from_real(re: BigRational) -> Self {
        RatComplex::new(re, <BigRational as Weight>::zero())
    }
    fn re(&self) -> BigRational {
        self.re.clone()
    }
    fn im(&self) -> BigRational {
        self.im.clone()
    }
    fn div_int(self, k: i64) -> Self {
        let d = <BigRational as Weight>::from_ratio(1, k);
        RatComplex::new(self.re * d.clone(), self.im * d)
    }
    fn modulus(&self) -> f64 {
        let re = Weight::to_f64(&self.re);
        let im = Weight::to_f64(&self.im);
        re.hypot(im)
    }
}

/// Compensated (double-double) accumulation, used where a quotient-space
/// projection cancels catastrophically in plain `f64`.
pub mod dd {
    /// Error-free sum: returns `(s, e)` with `s + e == a + b` exactly.
    #[inline]
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let t = s - a;
        let e = (a - (s - t)) + (b - t);
        (s, e)
    }

    /// Error-free product via FMA: `(p, e)` with `p + e == a * b` exactly.
    #[inline]
    fn two_prod(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        let e = f64::mul_add(a, b, -p);
        (p, e)
    }

    /// Running double-double accumulator.
    #[derive(Clone, Copy, Default)]
    pub struct Acc {
        hi: f64,
        lo: f64,
    }

    impl Acc {
        #[inline]
        pub fn add_prod(&mut self, a: f64, b: f64) {
            let (p, pe) = two_prod(a, b);
            let (s, se) = two_sum(self.hi, p);
            self.hi = s;
            self.lo += se + pe;
        }

        #[inline]
        pub fn add(&mut self, x: f64) {
            let (s, se) = two_sum(self.hi, x);
            self.hi = s;
            self.lo += se;
        }

        /// `self += a * t` keeping both halves of `t`.
        #[inline]
        pub fn add_scaled(&mut self, a: f64, t: &Acc) {
            self.add_prod(a, t.hi);
            self.add_prod(a, t.lo);
        }

        #[inline]
        pub fn value(&self) -> f64 {
            self.hi + self.lo
        }
    }

    /// Compensated dot product of two slices.
    pub fn dot(a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        let mut acc = Acc::default();
        for (x, y) in a.iter().zip(b) {
            acc.add_prod(*x, *y);
        }
        acc.value()
    }
}
