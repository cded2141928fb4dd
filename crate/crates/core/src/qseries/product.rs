use num_rational::BigRational;
use num_traits::Zero;

use super::laurent::LaurentPolyS;
use super::series::TruncatedSeries;
use crate::error::{Error, Result};

/// `prod_{k >= 0} (1 - coef s^sdeg t^{tdeg + tstep k})^exponent`.
///
/// With `tstep == 0` only the `k = 0` factor is taken.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductFactor {
    pub coef: BigRational,
    pub sdeg: i32,
    pub tdeg: i32,
    pub tstep: i32,
    pub exponent: i32,
}

impl ProductFactor {
    pub fn new(coef: i64, sdeg: i32, tdeg: i32, tstep: i32, exponent: i32) -> Self {
        ProductFactor {
            coef: BigRational::from_integer(coef.into()),
            sdeg,
            tdeg,
            tstep,
            exponent,
        }
    }

    /// `(1 - coef s^sdeg t^tdeg)^exponent`, a single factor.
    pub fn single(coef: i64, sdeg: i32, tdeg: i32, exponent: i32) -> Self {
        Self::new(coef, sdeg, tdeg, 0, exponent)
    }

    /// The factors that contribute below `order`, as `t`-degrees.
    fn degrees(&self, order: i32) -> Vec<i32> {
        if self.tstep == 0 {
            return if self.tdeg <= order { vec![self.tdeg] } else { vec![] };
        }
        (0..).map(|k| self.tdeg + self.tstep * k).take_while(|d| *d <= order).collect()
    }
}

/// Expands a product of [`ProductFactor`]s through `t^order` by direct
/// multiplication, one binomial factor at a time.
pub fn expand_product(factors: &[ProductFactor], order: i32) -> Result<TruncatedSeries> {
    for f in factors {
        if f.tdeg <= 0 || f.tstep < 0 {
            return Err(Error::Series(format!(
                "factor (1 - s^{} t^({} + {} k)) does not truncate",
                f.sdeg, f.tdeg, f.tstep
            )));
        }
    }
    if order < 0 {
        return Ok(TruncatedSeries::zero(order));
    }
    let n = order as usize;
    let mut c = vec![LaurentPolyS::zero(); n + 1];
    c[0] = LaurentPolyS::one();
    for f in factors {
        if f.coef.is_zero() {
            continue;
        }
        let m = LaurentPolyS::monomial(f.coef.clone(), f.sdeg);
        for d in f.degrees(order) {
            let d = d as usize;
            for _ in 0..f.exponent.unsigned_abs() {
                if f.exponent > 0 {
                    // multiply by (1 - m t^d)
                    for i in (d..=n).rev() {
                        if !c[i - d].is_zero() {
                            let delta = &c[i - d] * &m;
                            c[i] = &c[i] - &delta;
                        }
                    }
                } else {
                    // divide by (1 - m t^d)
                    for i in d..=n {
                        if !c[i - d].is_zero() {
                            let delta = &c[i - d] * &m;
                            c[i] = &c[i] + &delta;
                        }
                    }
                }
            }
        }
    }
    Ok(TruncatedSeries::from_coeffs(0, order, c))
}

/// `coef s^{s_mult n} t^{t_mult n}`, a term of a Lambert-type summand.
#[derive(Debug, Clone, PartialEq)]
pub struct LambertTerm {
    pub coef: BigRational,
    pub s_mult: i32,
    pub t_mult: i32,
}

impl LambertTerm {
    pub fn new(coef: i64, s_mult: i32, t_mult: i32) -> Self {
        LambertTerm { coef: BigRational::from_integer(coef.into()), s_mult, t_mult }
    }
}

/// Expands a pattern into a finite sum of terms, e.g. `(1 - q^n)(w^{2n} - 1)`.
pub fn pattern_product(a: &[LambertTerm], b: &[LambertTerm]) -> Vec<LambertTerm> {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            out.push(LambertTerm {
                coef: &x.coef * &y.coef,
                s_mult: x.s_mult + y.s_mult,
                t_mult: x.t_mult + y.t_mult,
            });
        }
    }
    out
}

fn pattern_at(p: &[LambertTerm], n: i32, order: i32) -> TruncatedSeries {
    let mut acc = TruncatedSeries::zero(order);
    for term in p {
        acc = &acc + &TruncatedSeries::monomial(term.coef.clone(), term.s_mult * n, term.t_mult * n, order);
    }
    acc
}

/// `sum_{n >= 1} N(n) / (n D(n))` through `t^order`, where numerator and
/// denominator are sums of [`LambertTerm`]s evaluated at `n`.
///
/// Every numerator term needs positive `t_mult` so the sum over `n` is
/// finite; the denominator must be a nonzero constant plus terms of positive
/// `t_mult`.
pub fn lambert_sum(numerator: &[LambertTerm], denominator: &[LambertTerm], order: i32) -> Result<TruncatedSeries> {
    let live: Vec<&LambertTerm> = numerator.iter().filter(|t| !t.coef.is_zero()).collect();
    if live.is_empty() {
        return Ok(TruncatedSeries::zero(order));
    }
    if let Some(bad) = live.iter().find(|t| t.t_mult <= 0) {
        return Err(Error::Series(format!(
            "numerator term s^{{{}n}} t^{{{}n}} does not truncate",
            bad.s_mult, bad.t_mult
        )));
    }
    let constant: BigRational = denominator
        .iter()
        .filter(|t| t.t_mult == 0)
        .map(|t| {
            if t.s_mult != 0 {
                Err(Error::Series("denominator has an s-dependent constant part".into()))
            } else {
                Ok(t.coef.clone())
            }
        })
        .sum::<Result<BigRational>>()?;
    if constant.is_zero() || denominator.iter().any(|t| t.t_mult < 0) {
        return Err(Error::Series("denominator must be a nonzero constant plus positive t-degrees".into()));
    }
    let min_t = live.iter().map(|t| t.t_mult).min().unwrap_or(1);
    let mut acc = TruncatedSeries::zero(order);
    let mut n = 1;
    while min_t * n <= order {
        let num = pattern_at(numerator, n, order);
        let den = pattern_at(denominator, n, order);
        let term = num.div(&den)?.truncate(order);
        acc = &acc + &term.scale(&BigRational::new(1.into(), (n as i64).into()));
        n += 1;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ri(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn odd_q_product_matches_hand_expansion() {
        // prod_k (1 - q^{2k+1}) = (1-q)(1-q^3)... = 1 - q - q^3 + q^4 + ... in q; q = t^4
        let p = expand_product(&[ProductFactor::new(1, 0, 4, 8, 1)], 16).unwrap();
        let expect = [(0, 1), (4, -1), (12, -1), (16, 1)];
        for d in 0..=16 {
            let want = expect.iter().find(|e| e.0 == d).map_or(0, |e| e.1);
            assert_eq!(p.coeff(d), LaurentPolyS::constant(ri(want)), "t^{d}");
        }
    }

    #[test]
    fn empty_product_is_one() {
        assert!(expand_product(&[], 12).unwrap().is_one());
    }

    #[test]
    fn rejects_non_truncating_factor() {
        assert!(expand_product(&[ProductFactor::single(1, 1, 0, 1)], 5).is_err());
    }

    #[test]
    fn negative_exponent_is_division() {
        let f = ProductFactor::new(2, 1, 3, 2, 3);
        let mut g = f.clone();
        g.exponent = -3;
        let a = expand_product(&[f], 20).unwrap();
        let b = expand_product(&[g], 20).unwrap();
        assert!((&a * &b).agrees_with(&TruncatedSeries::one(20)));
    }

    #[test]
    fn lambert_zero_numerator() {
        let s = lambert_sum(&[LambertTerm::new(0, 1, 2)], &[LambertTerm::new(1, 0, 0)], 10).unwrap();
        assert!(s.is_zero());
    }

    #[test]
    fn lambert_rejects_non_truncating() {
        assert!(lambert_sum(&[LambertTerm::new(1, 1, 0)], &[LambertTerm::new(1, 0, 0)], 10).is_err());
    }

    #[test]
    fn lambert_log_of_geometric() {
        // sum_n t^n / n = -log(1 - t)
        let s = lambert_sum(&[LambertTerm::new(1, 0, 1)], &[LambertTerm::new(1, 0, 0)], 12).unwrap();
        let l = expand_product(&[ProductFactor::single(1, 0, 1, -1)], 12).unwrap().log().unwrap();
        assert!(s.agrees_with(&l));
    }
}
