//! Scalar fields used throughout the crate.
//!
//! [`Scalar`] is the field interface (exact or floating); [`Real`] adds the
//! transcendental functions needed by hyperbolic parameterizations, infinite
//! sums and products. Implementations: `f64`, [`HpFloat`] (software float
//! with configurable mantissa) and `BigRational` (exact, `Scalar` only).

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt::{self, Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// True for exact arithmetic (equality tests are exact, no tolerances).
    const EXACT: bool;
    /// Short name used in reports: `f64`, `rational` or `hp`.
    const NAME: &'static str;

    fn from_i64(n: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn to_f64(&self) -> f64;

    /// Square root, or `None` when the argument is negative or (for exact
    /// types) not a perfect square.
    fn sqrt_checked(&self) -> Option<Self>;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn powi(&self, n: i32) -> Self {
        let mut base = if n < 0 { Self::one() / self.clone() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }

    /// `|a - b| <= rel * max(|a|, |b|)`; exact types require equality.
    fn near(&self, other: &Self, rel: f64) -> bool {
        if Self::EXACT {
            return self == other;
        }
        let a = self.to_f64();
        let b = other.to_f64();
        (a - b).abs() <= rel * a.abs().max(b.abs())
    }
}

/// Scalars with exponential, logarithm and trigonometric functions.
pub trait Real: Scalar {
    fn from_f64(x: f64) -> Self;
    fn pi() -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;

    fn sinh(&self) -> Self {
        let e = self.exp();
        (e.clone() - Self::one() / e) / Self::from_i64(2)
    }

    fn cosh(&self) -> Self {
        let e = self.exp();
        (e.clone() + Self::one() / e) / Self::from_i64(2)
    }

    /// Relative size of one unit in the last place.
    fn epsilon() -> f64;
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const NAME: &'static str = "f64";

    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn sqrt_checked(&self) -> Option<Self> {
        (*self >= 0.0).then(|| f64::sqrt(*self))
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn sinh(&self) -> Self {
        f64::sinh(*self)
    }
    fn cosh(&self) -> Self {
        f64::cosh(*self)
    }
    fn epsilon() -> f64 {
        f64::EPSILON
    }
}

fn exact_sqrt_int(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    const NAME: &'static str = "rational";

    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(n.into())
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn sqrt_checked(&self) -> Option<Self> {
        let n = exact_sqrt_int(self.numer())?;
        let d = exact_sqrt_int(self.denom())?;
        Some(BigRational::new(n, d))
    }
}

// ---------------------------------------------------------------------------
// High-precision software float.

/// Default mantissa length of [`HpFloat`] in bits.
pub const DEFAULT_PRECISION_BITS: usize = 256;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static PRECISION: RefCell<usize> = const { RefCell::new(DEFAULT_PRECISION_BITS) };
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn prec() -> usize {
    PRECISION.with(|p| *p.borrow())
}

/// Sets the calling thread's `HpFloat` precision.
pub fn set_precision(bits: usize) {
    PRECISION.with(|p| *p.borrow_mut() = bits);
}

/// Run `f` with the thread's `HpFloat` precision set to `bits`.
pub fn with_precision<R>(bits: usize, f: impl FnOnce() -> R) -> R {
    let old = PRECISION.with(|p| std::mem::replace(&mut *p.borrow_mut(), bits));
    let r = f();
    PRECISION.with(|p| *p.borrow_mut() = old);
    r
}

/// Software floating point number; precision is taken from the current
/// thread setting (see [`with_precision`]) at each operation.
#[derive(Clone)]
pub struct HpFloat(BigFloat);

impl HpFloat {
    pub fn inner(&self) -> &BigFloat {
        &self.0
    }

    fn with_cc(f: impl FnOnce(&mut Consts) -> BigFloat) -> Self {
        CONSTS.with(|cc| HpFloat(f(&mut cc.borrow_mut())))
    }
}

impl Debug for HpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Display for HpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl PartialEq for HpFloat {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for HpFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl Add for HpFloat {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        HpFloat(self.0.add(&rhs.0, prec(), RM))
    }
}

impl Sub for HpFloat {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        HpFloat(self.0.sub(&rhs.0, prec(), RM))
    }
}

impl Mul for HpFloat {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        HpFloat(self.0.mul(&rhs.0, prec(), RM))
    }
}

impl Div for HpFloat {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        HpFloat(self.0.div(&rhs.0, prec(), RM))
    }
}

impl Neg for HpFloat {
    type Output = Self;
    fn neg(self) -> Self {
        HpFloat(self.0.neg())
    }
}

impl Zero for HpFloat {
    fn zero() -> Self {
        HpFloat(BigFloat::from_i64(0, prec()))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for HpFloat {
    fn one() -> Self {
        HpFloat(BigFloat::from_i64(1, prec()))
    }
}

impl Scalar for HpFloat {
    const EXACT: bool = false;
    const NAME: &'static str = "hp";

    fn from_i64(n: i64) -> Self {
        HpFloat(BigFloat::from_i64(n, prec()))
    }

    fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        format!("{}", self.0).parse().unwrap_or(f64::NAN)
    }

    fn sqrt_checked(&self) -> Option<Self> {
        (!self.0.is_negative()).then(|| HpFloat(self.0.sqrt(prec(), RM)))
    }

    fn near(&self, other: &Self, rel: f64) -> bool {
        let d = (self.clone() - other.clone()).abs();
        let m = if self.abs() > other.abs() { self.abs() } else { other.abs() };
        d <= m * HpFloat::from_f64(rel)
    }
}

impl Real for HpFloat {
    fn from_f64(x: f64) -> Self {
        HpFloat(BigFloat::from_f64(x, prec()))
    }
    fn pi() -> Self {
        Self::with_cc(|cc| cc.pi(prec(), RM))
    }
    fn exp(&self) -> Self {
        Self::with_cc(|cc| self.0.exp(prec(), RM, cc))
    }
    fn ln(&self) -> Self {
        Self::with_cc(|cc| self.0.ln(prec(), RM, cc))
    }
    fn sqrt(&self) -> Self {
        HpFloat(self.0.sqrt(prec(), RM))
    }
    fn sin(&self) -> Self {
        Self::with_cc(|cc| self.0.sin(prec(), RM, cc))
    }
    fn cos(&self) -> Self {
        Self::with_cc(|cc| self.0.cos(prec(), RM, cc))
    }
    fn epsilon() -> f64 {
        2f64.powi(-(prec() as i32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_sqrt_is_exact_or_none() {
        let x = BigRational::new(9.into(), 16.into());
        assert_eq!(x.sqrt_checked(), Some(BigRational::new(3.into(), 4.into())));
        assert_eq!(BigRational::from_i64(2).sqrt_checked(), None);
        assert_eq!(BigRational::from_i64(-4).sqrt_checked(), None);
    }

    #[test]
    fn hp_float_carries_more_digits_than_f64() {
        let third = HpFloat::one() / HpFloat::from_i64(3);
        let back = third * HpFloat::from_i64(3) - HpFloat::one();
        assert!(back.abs() < HpFloat::from_f64(1e-70));
        let e = HpFloat::one().exp();
        assert!((e.to_f64() - std::f64::consts::E).abs() < 1e-15);
        let pi = HpFloat::pi();
        assert!(pi.sin().abs() < HpFloat::from_f64(1e-70));
    }

    #[test]
    fn powi_handles_negative_exponents() {
        assert_eq!(Scalar::powi(&BigRational::from_i64(2), -3), BigRational::from_ratio(1, 8));
        assert!((Scalar::powi(&HpFloat::from_i64(3), 4).to_f64() - 81.0).abs() < 1e-12);
    }
}
