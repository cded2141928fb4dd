use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::Zero;

use super::laurent::LaurentPolyS;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Power series in `t = q^{1/4}` with Laurent-polynomial coefficients in `s`,
/// known exactly through `t^order`.
///
/// Leading zero coefficients are trimmed, so `valuation()` is the degree of
/// the first nonzero term.
#[derive(Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    min_deg: i32,
    order: i32,
    coeffs: Vec<LaurentPolyS>,
}

impl TruncatedSeries {
    pub fn zero(order: i32) -> Self {
        TruncatedSeries { min_deg: order + 1, order, coeffs: Vec::new() }
    }

    pub fn one(order: i32) -> Self {
        Self::from_poly(LaurentPolyS::one(), 0, order)
    }

    pub fn constant(c: BigRational, order: i32) -> Self {
        Self::from_poly(LaurentPolyS::constant(c), 0, order)
    }

    /// `c s^sdeg t^tdeg`.
    pub fn monomial(c: BigRational, sdeg: i32, tdeg: i32, order: i32) -> Self {
        Self::from_poly(LaurentPolyS::monomial(c, sdeg), tdeg, order)
    }

    pub fn from_poly(p: LaurentPolyS, tdeg: i32, order: i32) -> Self {
        if tdeg > order {
            return Self::zero(order);
        }
        Self::from_coeffs(tdeg, order, vec![p])
    }

    /// Coefficients for degrees `min_deg, min_deg+1, ...`; anything above
    /// `order` is dropped.
    pub fn from_coeffs(min_deg: i32, order: i32, mut coeffs: Vec<LaurentPolyS>) -> Self {
        let keep = (order - min_deg + 1).max(0) as usize;
        coeffs.truncate(keep);
        let mut s = TruncatedSeries { min_deg, order, coeffs };
        s.trim();
        s
    }

    /// Builds a series whose coefficient of `t^d`, `lo <= d <= order`, is `f(d)`.
    pub fn from_fn(lo: i32, order: i32, f: impl FnMut(i32) -> LaurentPolyS) -> Self {
        Self::from_coeffs(lo, order, (lo..=order).map(f).collect())
    }

    fn trim(&mut self) {
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead == self.coeffs.len() {
            self.coeffs.clear();
            self.min_deg = self.order + 1;
            return;
        }
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.min_deg += lead as i32;
        }
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn order(&self) -> i32 {
        self.order
    }

    /// Degree of the first nonzero coefficient; `order + 1` for the zero series.
    pub fn valuation(&self) -> i32 {
        self.min_deg
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, tdeg: i32) -> LaurentPolyS {
        let i = tdeg - self.min_deg;
        if i < 0 || i as usize >= self.coeffs.len() {
            LaurentPolyS::zero()
        } else {
            self.coeffs[i as usize].clone()
        }
    }

    fn coeff_ref(&self, tdeg: i32) -> Option<&LaurentPolyS> {
        let i = tdeg - self.min_deg;
        if i < 0 {
            None
        } else {
            self.coeffs.get(i as usize)
        }
    }

    /// Nonzero `(tdeg, coefficient)` pairs in increasing degree.
    pub fn terms(&self) -> impl Iterator<Item = (i32, &LaurentPolyS)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.min_deg + i as i32, c))
    }

    /// Lower the truncation order (never raises it).
    pub fn truncate(&self, order: i32) -> Self {
        let order = order.min(self.order);
        Self::from_coeffs(self.min_deg, order, self.coeffs.clone())
    }

    /// Multiply by `t^k`.
    pub fn shift_t(&self, k: i32) -> Self {
        TruncatedSeries {
            min_deg: self.min_deg + k,
            order: self.order + k,
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_coeffs(self.min_deg, self.order, self.coeffs.iter().map(|p| p.scale(c)).collect())
    }

    /// Multiply every coefficient by a Laurent polynomial in `s`.
    pub fn scale_poly(&self, p: &LaurentPolyS) -> Self {
        Self::from_coeffs(self.min_deg, self.order, self.coeffs.iter().map(|c| c * p).collect())
    }

    /// The involution `s -> 1/s`.
    pub fn invert_s(&self) -> Self {
        TruncatedSeries {
            min_deg: self.min_deg,
            order: self.order,
            coeffs: self.coeffs.iter().map(LaurentPolyS::invert_s).collect(),
        }
    }

    /// True if every coefficient satisfies `|sdeg| * cone <= tdeg`.
    pub fn within_cone(&self, cone: i32) -> bool {
        self.terms().all(|(d, p)| {
            p.min_exp().is_none_or(|lo| lo.abs() * cone <= d)
                && p.max_exp().is_none_or(|hi| hi.abs() * cone <= d)
        })
    }

    /// Substitution `s -> t^tshift s^{±1}`: each `s^k t^d` becomes
    /// `s^{sign k} t^{d + tshift k}`.
    ///
    /// When `tshift != 0` the image of the unknown tail can land below the
    /// input order. `cone` asserts that every coefficient, including the
    /// unknown ones, satisfies `|k| * cone <= d`; this is checked on the
    /// known part and used to lower the output order accordingly.
    pub fn substitute_s(&self, invert: bool, tshift: i32, cone: i32) -> Result<Self> {
        let sign = if invert { -1 } else { 1 };
        let order = if tshift == 0 {
            self.order
        } else {
            if cone <= tshift.abs() || !self.within_cone(cone) {
                return Err(Error::Series(format!(
                    "substitution s -> t^{tshift} s^{sign} needs coefficients in the cone |k|*{cone} <= d"
                )));
            }
            // unknown tail starts at d = order + 1 and maps to d (1 - |tshift|/cone) or above
            let d = (self.order + 1) as i64;
            let lo = (d * (cone - tshift.abs()) as i64 + cone as i64 - 1) / cone as i64;
            (lo - 1) as i32
        };
        let mut acc: std::collections::BTreeMap<i32, LaurentPolyS> = Default::default();
        for (d, p) in self.terms() {
            for (k, c) in p.terms() {
                let nd = d + tshift * k;
                if nd <= order {
                    acc.entry(nd).or_default().add_term(sign * k, c.clone());
                }
            }
        }
        let lo = acc.keys().next().copied().unwrap_or(order + 1);
        Ok(Self::from_fn(lo, order, |d| acc.remove(&d).unwrap_or_default()))
    }

    /// `1/self`; the leading coefficient must be a monomial in `s`.
    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Series("division by a series that is zero to its order".into()));
        }
        let v = self.min_deg;
        let lead_inv = self.coeffs[0].monomial_inverse().ok_or_else(|| {
            Error::Series(format!(
                "leading coefficient {} is not a monomial in s; reciprocal is not a Laurent series",
                self.coeffs[0]
            ))
        })?;
        let n = (self.order - v).max(0) as usize;
        let r: Vec<LaurentPolyS> = (0..=n).map(|i| &self.coeffs.get(i).cloned().unwrap_or_default() * &lead_inv).collect();
        let mut c: Vec<LaurentPolyS> = Vec::with_capacity(n + 1);
        c.push(LaurentPolyS::one());
        for m in 1..=n {
            let mut acc = LaurentPolyS::zero();
            for k in 1..=m {
                if !r[k].is_zero() && !c[m - k].is_zero() {
                    acc.add_mul(&r[k], &c[m - k]);
                }
            }
            c.push(-&acc);
        }
        let c: Vec<LaurentPolyS> = c.iter().map(|p| p * &lead_inv).collect();
        Ok(Self::from_coeffs(-v, self.order - 2 * v, c))
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        Ok(self * &rhs.recip()?)
    }

    fn require_positive_valuation(&self, what: &str) -> Result<()> {
        if self.min_deg <= 0 {
            return Err(Error::Series(format!("{what} needs a series with positive minimum degree")));
        }
        Ok(())
    }

    /// `log(1 + self)`; requires positive valuation.
    pub fn log1p(&self) -> Result<Self> {
        self.require_positive_valuation("log1p")?;
        let t = self.order.max(0) as usize;
        let a = |n: usize| self.coeff_ref(n as i32);
        let mut b: Vec<LaurentPolyS> = vec![LaurentPolyS::zero(); t + 1];
        for n in 1..=t {
            let mut acc = LaurentPolyS::zero();
            for k in 1..n {
                if let Some(ak) = a(n - k) {
                    if !b[k].is_zero() {
                        acc.add_mul(&b[k].scale(&BigRational::from_integer(k.into())), ak);
                    }
                }
            }
            let mut bn = a(n).cloned().unwrap_or_default();
            bn = &bn - &acc.scale(&BigRational::new(1.into(), (n as i64).into()));
            b[n] = bn;
        }
        Ok(Self::from_coeffs(0, self.order, b))
    }

    /// `exp(self)`; requires positive valuation.
    pub fn exp(&self) -> Result<Self> {
        self.require_positive_valuation("exp")?;
        let t = self.order.max(0) as usize;
        let ka: Vec<LaurentPolyS> = (0..=t)
            .map(|k| self.coeff(k as i32).scale(&BigRational::from_integer(k.into())))
            .collect();
        let mut e: Vec<LaurentPolyS> = Vec::with_capacity(t + 1);
        e.push(LaurentPolyS::one());
        for n in 1..=t {
            let mut acc = LaurentPolyS::zero();
            for k in 1..=n {
                if !ka[k].is_zero() && !e[n - k].is_zero() {
                    acc.add_mul(&ka[k], &e[n - k]);
                }
            }
            e.push(acc.scale(&BigRational::new(1.into(), (n as i64).into())));
        }
        Ok(Self::from_coeffs(0, self.order, e))
    }

    /// `log(self)` for a series of the form `1 + O(t)`.
    pub fn log(&self) -> Result<Self> {
        if self.min_deg != 0 || self.coeffs[0] != LaurentPolyS::one() {
            return Err(Error::Series("log needs a series starting with 1".into()));
        }
        (self - &Self::one(self.order)).log1p()
    }

    pub fn powi(&self, e: i32) -> Result<Self> {
        if e == 0 {
            return Ok(Self::one(self.order - self.min_deg));
        }
        let mut b = if e < 0 { self.recip()? } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut acc: Option<Self> = None;
        while n > 0 {
            if n & 1 == 1 {
                acc = Some(match acc {
                    None => b.clone(),
                    Some(a) => &a * &b,
                });
            }
            n >>= 1;
            if n > 0 {
                b = &b * &b;
            }
        }
        Ok(acc.expect("nonzero exponent"))
    }

    /// Substitute a rational value for `s`, leaving an `s`-free series.
    pub fn specialize_s(&self, s: &BigRational) -> Self {
        Self::from_coeffs(
            self.min_deg,
            self.order,
            self.coeffs.iter().map(|p| LaurentPolyS::constant(p.eval_rational(s))).collect(),
        )
    }

    /// `log(1 - c s^sdeg t^tdeg) = -sum_m c^m s^{m sdeg} t^{m tdeg} / m`.
    pub fn log_one_minus(c: &BigRational, sdeg: i32, tdeg: i32, order: i32) -> Result<Self> {
        if tdeg <= 0 {
            return Err(Error::Series("log(1 - x) needs x of positive t-degree".into()));
        }
        let mut acc = Self::zero(order);
        let mut cm = c.clone();
        let mut m = 1;
        while m * tdeg <= order {
            let term = Self::monomial(-cm.clone() / BigRational::from_integer(m.into()), m * sdeg, m * tdeg, order);
            acc = &acc + &term;
            cm *= c;
            m += 1;
        }
        Ok(acc)
    }

    /// True if no coefficient depends on `s`.
    pub fn is_s_independent(&self) -> bool {
        self.coeffs.iter().all(LaurentPolyS::is_constant)
    }

    /// Evaluate the truncated sum at numeric `(t, s)`.
    pub fn eval<S: Real>(&self, t: &S, s: &S) -> S {
        let mut acc = S::zero();
        for (d, p) in self.terms() {
            acc = acc + p.eval(s) * t.powi(d);
        }
        acc
    }

    /// Exact evaluation of the truncated sum at rational `(t, s)`.
    pub fn eval_rational(&self, t: &BigRational, s: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (d, p) in self.terms() {
            acc += p.eval_rational(s) * crate::scalar::Scalar::powi(t, d);
        }
        acc
    }

    /// First degree at which `self` and `other` differ, up to the smaller order.
    pub fn first_difference(&self, other: &Self) -> Option<i32> {
        let order = self.order.min(other.order);
        let lo = self.min_deg.min(other.min_deg);
        (lo..=order).find(|&d| self.coeff(d) != other.coeff(d))
    }

    pub fn agrees_with(&self, other: &Self) -> bool {
        self.first_difference(other).is_none()
    }
}

fn combine(a: &TruncatedSeries, b: &TruncatedSeries, neg: bool) -> TruncatedSeries {
    let order = a.order.min(b.order);
    let lo = a.min_deg.min(b.min_deg);
    if lo > order {
        return TruncatedSeries::zero(order);
    }
    TruncatedSeries::from_fn(lo, order, |d| {
        let x = a.coeff_ref(d);
        let y = b.coeff_ref(d);
        match (x, y) {
            (Some(x), Some(y)) => {
                if neg {
                    x - y
                } else {
                    x + y
                }
            }
            (Some(x), None) => x.clone(),
            (None, Some(y)) => {
                if neg {
                    -y
                } else {
                    y.clone()
                }
            }
            (None, None) => LaurentPolyS::zero(),
        }
    })
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        combine(self, rhs, false)
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        combine(self, rhs, true)
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries {
            min_deg: self.min_deg,
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let order = (self.order + rhs.min_deg).min(rhs.order + self.min_deg);
        if self.is_zero() || rhs.is_zero() {
            return TruncatedSeries::zero(order);
        }
        let lo = self.min_deg + rhs.min_deg;
        if lo > order {
            return TruncatedSeries::zero(order);
        }
        let n = (order - lo + 1) as usize;
        let mut out = vec![LaurentPolyS::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() || i >= n {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if i + j >= n {
                    break;
                }
                if !b.is_zero() {
                    out[i + j].add_mul(a, b);
                }
            }
        }
        TruncatedSeries::from_coeffs(lo, order, out)
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr for TruncatedSeries {
            type Output = TruncatedSeries;
            fn $m(self, rhs: TruncatedSeries) -> TruncatedSeries {
                (&self).$m(&rhs)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl Neg for TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        -&self
    }
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (d, p) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({p})*t^{d}")?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(t^{})", self.order + 1)
    }
}

impl Default for TruncatedSeries {
    fn default() -> Self {
        TruncatedSeries::zero(0)
    }
}

impl TruncatedSeries {
    /// `sum_{n >= 1} t^{n d}` style geometric helper: `1/(1 - c s^k t^d)`.
    pub fn geometric(c: BigRational, sdeg: i32, tdeg: i32, order: i32) -> Result<Self> {
        if tdeg <= 0 {
            return Err(Error::Series("geometric series needs positive t-degree".into()));
        }
        let mono = LaurentPolyS::monomial(c, sdeg);
        let mut p = LaurentPolyS::one();
        let mut out = Vec::new();
        let mut d = 0;
        while d <= order {
            out.push((d, p.clone()));
            p = &p * &mono;
            d += tdeg;
        }
        let mut map: std::collections::HashMap<i32, LaurentPolyS> = out.into_iter().collect();
        Ok(Self::from_fn(0, order, |d| map.remove(&d).unwrap_or_default()))
    }

    pub fn is_one(&self) -> bool {
        self.min_deg == 0 && self.coeffs.len() == 1 && self.coeffs[0] == LaurentPolyS::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn geometric_identity() {
        let t = 20;
        let one_minus_t = &TruncatedSeries::one(t) - &TruncatedSeries::monomial(r(1), 0, 1, t);
        let g = TruncatedSeries::geometric(r(1), 0, 1, t).unwrap();
        assert!((&one_minus_t * &g).agrees_with(&TruncatedSeries::one(t)));
        assert_eq!((&one_minus_t * &g).order(), t);
    }

    #[test]
    fn monomial_product() {
        let a = TruncatedSeries::monomial(r(1), 1, 2, 10);
        let b = TruncatedSeries::monomial(r(1), -1, 3, 10);
        let c = &a * &b;
        assert_eq!(c.coeff(5), LaurentPolyS::one());
        assert_eq!(c.valuation(), 5);
    }

    #[test]
    fn reciprocal_with_monomial_lead() {
        let t = 15;
        // b = 2 s t^2 + t^3 - s^-1 t^5
        let b = &(&TruncatedSeries::monomial(r(2), 1, 2, t) + &TruncatedSeries::monomial(r(1), 0, 3, t))
            - &TruncatedSeries::monomial(r(1), -1, 5, t);
        let inv = b.recip().unwrap();
        assert_eq!(inv.valuation(), -2);
        assert_eq!(inv.order(), t - 4);
        let p = &b * &inv;
        assert_eq!(p.order(), t - 2);
        assert!(p.agrees_with(&TruncatedSeries::one(t - 2)));
    }

    #[test]
    fn reciprocal_rejects_binomial_lead() {
        let b = TruncatedSeries::from_poly(LaurentPolyS::from_terms([(0, r(1)), (1, r(1))]), 0, 5);
        assert!(matches!(b.recip(), Err(Error::Series(_))));
    }

    #[test]
    fn log_of_geometric() {
        let t = 30;
        for n in 1..5 {
            let g = TruncatedSeries::geometric(r(1), 0, n, t).unwrap();
            let l = g.log().unwrap();
            for d in 0..=t {
                let expect = if d > 0 && d % n == 0 {
                    LaurentPolyS::constant(BigRational::new(1.into(), ((d / n) as i64).into()))
                } else {
                    LaurentPolyS::zero()
                };
                assert_eq!(l.coeff(d), expect, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn log1p_rejects_constant_term() {
        assert!(TruncatedSeries::one(4).log1p().is_err());
        assert!(TruncatedSeries::one(4).exp().is_err());
    }

    #[test]
    fn exp_log_round_trip() {
        let t = 18;
        let a = &TruncatedSeries::monomial(r(3), 1, 1, t) + &TruncatedSeries::monomial(BigRational::new(1.into(), 2.into()), -2, 4, t);
        let back = a.exp().unwrap().log().unwrap();
        assert!(back.agrees_with(&a));
    }

    #[test]
    fn inversion_substitution_lowers_order() {
        let t = 30;
        // s t^6 + s^-1 t^6 + s^2 t^12 lies in the cone |k|*6 <= d
        let a = &(&TruncatedSeries::monomial(r(1), 1, 6, t) + &TruncatedSeries::monomial(r(1), -1, 6, t))
            + &TruncatedSeries::monomial(r(1), 2, 12, t);
        let b = a.substitute_s(true, 4, 6).unwrap();
        assert_eq!(b.order(), 10);
        assert_eq!(b.coeff(2), LaurentPolyS::monomial(r(1), 1));
        assert_eq!(b.coeff(10), LaurentPolyS::monomial(r(1), -1));
        assert_eq!(b.coeff(20), LaurentPolyS::zero());
        let out_of_cone = TruncatedSeries::monomial(r(1), 1, 2, t);
        assert!(out_of_cone.substitute_s(true, 4, 6).is_err());
        assert_eq!(a.substitute_s(true, 0, 0).unwrap(), a.invert_s());
    }

    #[test]
    fn powi_negative() {
        let t = 12;
        let a = &TruncatedSeries::one(t) + &TruncatedSeries::monomial(r(1), 1, 2, t);
        let a3 = a.powi(3).unwrap();
        let am3 = a.powi(-3).unwrap();
        assert!((&a3 * &am3).agrees_with(&TruncatedSeries::one(t)));
        assert!(a.powi(0).unwrap().is_one());
    }
}
