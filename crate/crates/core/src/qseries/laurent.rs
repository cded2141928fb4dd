use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::scalar::{Real, Scalar};

/// Laurent polynomial in `s` with exact rational coefficients.
///
/// Zero coefficients are never stored, so the first and last keys are the
/// tight exponent bounds.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct LaurentPolyS {
    terms: BTreeMap<i32, BigRational>,
}

impl LaurentPolyS {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(BigRational::one(), 0)
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(c, 0)
    }

    pub fn monomial(c: BigRational, sdeg: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(sdeg, c);
        }
        LaurentPolyS { terms }
    }

    pub fn from_terms(it: impl IntoIterator<Item = (i32, BigRational)>) -> Self {
        let mut p = Self::zero();
        for (k, c) in it {
            p.add_term(k, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn min_exp(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    pub fn coeff(&self, sdeg: i32) -> BigRational {
        self.terms.get(&sdeg).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &BigRational)> + '_ {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, sdeg: i32, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(sdeg) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// `self += a * b`.
    pub fn add_mul(&mut self, a: &LaurentPolyS, b: &LaurentPolyS) {
        for (ka, ca) in &a.terms {
            for (kb, cb) in &b.terms {
                self.add_term(ka + kb, ca * cb);
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LaurentPolyS {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    /// Multiply by `s^k`.
    pub fn shift(&self, k: i32) -> Self {
        LaurentPolyS {
            terms: self.terms.iter().map(|(e, v)| (e + k, v.clone())).collect(),
        }
    }

    /// The involution `s -> 1/s`.
    pub fn invert_s(&self) -> Self {
        LaurentPolyS {
            terms: self.terms.iter().map(|(e, v)| (-e, v.clone())).collect(),
        }
    }

    /// Inverse of a monomial, `None` otherwise.
    pub fn monomial_inverse(&self) -> Option<Self> {
        if !self.is_monomial() {
            return None;
        }
        let (k, c) = self.terms.iter().next()?;
        Some(Self::monomial(c.recip(), -k))
    }

    /// True if `self` does not depend on `s`.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|k| *k == 0)
    }

    pub fn eval<S: Real>(&self, s: &S) -> S {
        let mut acc = S::zero();
        for (k, c) in &self.terms {
            acc = acc + rational_to::<S>(c) * s.powi(*k);
        }
        acc
    }

    pub fn eval_rational(&self, s: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (k, c) in &self.terms {
            acc += c * Scalar::powi(s, *k);
        }
        acc
    }
}

/// Rational to a real scalar, exact up to the target's rounding.
pub fn rational_to<S: Real>(c: &BigRational) -> S {
    let (n, d) = (c.numer(), c.denom());
    match (n.to_i64(), d.to_i64()) {
        (Some(n), Some(d)) => S::from_i64(n) / S::from_i64(d),
        _ => big_to::<S>(n) / big_to::<S>(d),
    }
}

fn big_to<S: Real>(n: &num_bigint::BigInt) -> S {
    let base = S::from_i64(1 << 32);
    let (sign, digits) = n.to_u32_digits();
    let mut acc = S::zero();
    for d in digits.iter().rev() {
        acc = acc * base.clone() + S::from_i64(*d as i64);
    }
    if sign == num_bigint::Sign::Minus {
        -acc
    } else {
        acc
    }
}

impl Add for &LaurentPolyS {
    type Output = LaurentPolyS;
    fn add(self, rhs: &LaurentPolyS) -> LaurentPolyS {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, c.clone());
        }
        out
    }
}

impl Sub for &LaurentPolyS {
    type Output = LaurentPolyS;
    fn sub(self, rhs: &LaurentPolyS) -> LaurentPolyS {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, -c.clone());
        }
        out
    }
}

impl Mul for &LaurentPolyS {
    type Output = LaurentPolyS;
    fn mul(self, rhs: &LaurentPolyS) -> LaurentPolyS {
        let mut out = LaurentPolyS::zero();
        out.add_mul(self, rhs);
        out
    }
}

impl Neg for &LaurentPolyS {
    type Output = LaurentPolyS;
    fn neg(self) -> LaurentPolyS {
        LaurentPolyS {
            terms: self.terms.iter().map(|(k, v)| (*k, -v.clone())).collect(),
        }
    }
}

impl fmt::Debug for LaurentPolyS {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for LaurentPolyS {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else if i > 0 { "+" } else { "" };
            if i > 0 {
                write!(f, " {sign} ")?;
            } else {
                write!(f, "{sign}")?;
            }
            let a = Signed::abs(c);
            match *k {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}*s")?,
                _ => write!(f, "{a}*s^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let mut p = LaurentPolyS::monomial(r(1, 2), 3);
        p.add_term(3, r(-1, 2));
        assert!(p.is_zero());
        assert_eq!(p.min_exp(), None);
    }

    #[test]
    fn invert_s_is_an_involution() {
        let p = LaurentPolyS::from_terms([(-2, r(3, 1)), (0, r(1, 7)), (5, r(-2, 3))]);
        let q = p.invert_s();
        assert_eq!(q.min_exp(), Some(-5));
        assert_eq!(q.max_exp(), Some(2));
        assert_eq!(q.invert_s(), p);
    }

    #[test]
    fn product_and_monomial_inverse() {
        let a = LaurentPolyS::from_terms([(-1, r(1, 1)), (1, r(-1, 1))]);
        let b = &a * &a;
        assert_eq!(b, LaurentPolyS::from_terms([(-2, r(1, 1)), (0, r(-2, 1)), (2, r(1, 1))]));
        let m = LaurentPolyS::monomial(r(2, 3), -4);
        assert_eq!(&m * &m.monomial_inverse().unwrap(), LaurentPolyS::one());
        assert!(a.monomial_inverse().is_none());
    }

    #[test]
    fn evaluation() {
        let p = LaurentPolyS::from_terms([(-1, r(1, 1)), (2, r(1, 2))]);
        assert!((p.eval(&2.0f64) - 2.5).abs() < 1e-15);
        assert_eq!(p.eval_rational(&r(2, 1)), r(5, 2));
        let big = BigRational::new(
            "123456789012345678901234567890".parse().unwrap(),
            "1000000000000000000000000000000".parse().unwrap(),
        );
        assert!((rational_to::<f64>(&big) - 0.12345678901234568).abs() < 1e-16);
    }
}
