use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::laurent::LaurentPolyS;
use super::series::TruncatedSeries;
use crate::error::{Error, Result};

/// Polynomial in `q` with rational coefficients, lowest degree first.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct QPoly(Vec<BigRational>);

impl QPoly {
    pub fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        QPoly(c)
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// `c q^k`.
    pub fn monomial(c: BigRational, k: usize) -> Self {
        let mut v = vec![BigRational::zero(); k + 1];
        v[k] = c;
        Self::new(v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    /// Lowest power of `q` with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.0.iter().position(|c| !c.is_zero())
    }

    pub fn eval(&self, q: &BigRational) -> BigRational {
        self.0.iter().rev().fold(BigRational::zero(), |acc, c| acc * q + c)
    }

    /// As a series in `t` with `q = t^4`.
    pub fn to_series(&self, order: i32) -> TruncatedSeries {
        let mut acc = TruncatedSeries::zero(order);
        for (k, c) in self.0.iter().enumerate() {
            acc = &acc + &TruncatedSeries::from_poly(LaurentPolyS::constant(c.clone()), 4 * k as i32, order);
        }
        acc
    }
}

impl Add for &QPoly {
    type Output = QPoly;
    fn add(self, rhs: &QPoly) -> QPoly {
        let n = self.0.len().max(rhs.0.len());
        QPoly::new(
            (0..n)
                .map(|i| {
                    self.0.get(i).cloned().unwrap_or_else(BigRational::zero)
                        + rhs.0.get(i).cloned().unwrap_or_else(BigRational::zero)
                })
                .collect(),
        )
    }
}

impl Neg for &QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly(self.0.iter().map(|c| -c.clone()).collect())
    }
}

impl Mul for &QPoly {
    type Output = QPoly;
    fn mul(self, rhs: &QPoly) -> QPoly {
        if self.is_zero() || rhs.is_zero() {
            return QPoly::default();
        }
        let mut out = vec![BigRational::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::new(out)
    }
}

/// Rational function of `q`. Not reduced; equality is by cross-multiplication.
#[derive(Clone)]
pub struct RatFunc {
    num: QPoly,
    den: QPoly,
}

impl RatFunc {
    pub fn new(num: QPoly, den: QPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Series("rational function with zero denominator".into()));
        }
        Ok(RatFunc { num, den })
    }

    pub fn from_poly(p: QPoly) -> Self {
        RatFunc { num: p, den: QPoly::constant(BigRational::one()) }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_poly(QPoly::constant(c))
    }

    pub fn zero() -> Self {
        Self::from_poly(QPoly::default())
    }

    /// `q^k` for any integer `k`.
    pub fn q_pow(k: i32) -> Self {
        let m = QPoly::monomial(BigRational::one(), k.unsigned_abs() as usize);
        if k >= 0 {
            Self::from_poly(m)
        } else {
            RatFunc { num: QPoly::constant(BigRational::one()), den: m }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn recip(&self) -> Result<Self> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn eval(&self, q: &BigRational) -> Option<BigRational> {
        let d = self.den.eval(q);
        (!d.is_zero()).then(|| self.num.eval(q) / d)
    }

    /// Series in `t` (`q = t^4`) through `t^order`.
    pub fn to_series(&self, order: i32) -> Result<TruncatedSeries> {
        let v = 4 * self.den.valuation().unwrap_or(0) as i32;
        let extra = order + 2 * v;
        self.num.to_series(extra).div(&self.den.to_series(extra)).map(|s| s.truncate(order))
    }
}

impl PartialEq for RatFunc {
    fn eq(&self, other: &Self) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        RatFunc {
            num: &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            den: &self.den * &rhs.den,
        }
    }
}

impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}

impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        RatFunc { num: &self.num * &rhs.num, den: &self.den * &rhs.den }
    }
}

impl Div for &RatFunc {
    type Output = Result<RatFunc>;
    fn div(self, rhs: &RatFunc) -> Result<RatFunc> {
        Ok(self * &rhs.recip()?)
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |p: &QPoly| {
            p.0.iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| format!("{c}*q^{k}"))
                .collect::<Vec<_>>()
                .join(" + ")
        };
        write!(f, "({}) / ({})", show(&self.num), show(&self.den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn field_ops() {
        // 1/(1-q) - q/(1-q) = 1
        let one_minus_q = RatFunc::from_poly(QPoly::new(vec![r(1), r(-1)]));
        let a = (&RatFunc::constant(r(1)) / &one_minus_q).unwrap();
        let b = (&RatFunc::q_pow(1) / &one_minus_q).unwrap();
        assert_eq!(&a - &b, RatFunc::constant(r(1)));
        assert_eq!(&RatFunc::q_pow(-3) * &RatFunc::q_pow(3), RatFunc::constant(r(1)));
    }

    #[test]
    fn series_of_geometric() {
        let one_minus_q = RatFunc::from_poly(QPoly::new(vec![r(1), r(-1)]));
        let s = one_minus_q.recip().unwrap().to_series(12).unwrap();
        assert!(s.agrees_with(&TruncatedSeries::geometric(r(1), 0, 4, 12).unwrap()));
        let s = RatFunc::q_pow(-1).to_series(8).unwrap();
        assert_eq!(s.valuation(), -4);
    }
}
