//! Closed forms as exact series in `t = q^{1/4}` and `s`.
//!
//! The bulk free energy is returned reduced, `f_b + log Q`, which is a power
//! series starting at `t^0`; see [`crate::bundle`].

use num_rational::BigRational;

use crate::bundle::{CornerSeries, Route, SeriesBundle};
use crate::error::Result;
use crate::qseries::{expand_product, lambert_sum, pattern_product, LambertTerm, ProductFactor, TruncatedSeries};

fn lt(c: i64, s: i32, t: i32) -> LambertTerm {
    LambertTerm::new(c, s, t)
}

fn one() -> BigRational {
    BigRational::from_integer(1.into())
}

/// `log(1 + q)`.
pub fn log_one_plus_q(order: i32) -> Result<TruncatedSeries> {
    TruncatedSeries::monomial(one(), 0, 4, order).log1p()
}

/// `log(1 - c s^k t^d)` with integer `c`.
fn log1m(c: i64, sdeg: i32, tdeg: i32, order: i32) -> Result<TruncatedSeries> {
    TruncatedSeries::log_one_minus(&BigRational::from_integer(c.into()), sdeg, tdeg, order)
}

/// `-K1 - K2 + log Q = 2 log(1+q) + log(1-w^2) + log(1-q/w^2) - log(1-q^2/w^2) - log(1-q w^2)`.
pub fn minus_k_sum_plus_log_q(order: i32) -> Result<TruncatedSeries> {
    let l = log_one_plus_q(order)?;
    Ok(&(&(&(&l + &l) + &log1m(1, 1, 2, order)?) + &log1m(1, -1, 2, order)?)
        - &(&log1m(1, -1, 6, order)? + &log1m(1, 1, 6, order)?))
}

/// Reduced bulk free energy, Bethe-route form:
/// `log(1+q) - sum (1-q^n)(w^{2n} + q^n w^{-2n}) / (n(1+q^n))`.
pub fn bulk(order: i32) -> Result<TruncatedSeries> {
    let num = pattern_product(&[lt(1, 0, 0), lt(-1, 0, 4)], &[lt(1, 1, 2), lt(1, -1, 2)]);
    let sum = lambert_sum(&num, &[lt(1, 0, 0), lt(1, 0, 4)], order)?;
    Ok(&log_one_plus_q(order)? - &sum)
}

/// `log F = log(1+q) - sum q^n(1-q^n)(w^{2n} + q^n w^{-2n}) / (n(1+q^n))`,
/// the regular part of the bulk free energy, `e^{-f_b} = e^{K1+K2} F`.
pub fn bulk_log_f(order: i32) -> Result<TruncatedSeries> {
    let num = pattern_product(
        &pattern_product(&[lt(1, 0, 4)], &[lt(1, 0, 0), lt(-1, 0, 4)]),
        &[lt(1, 1, 2), lt(1, -1, 2)],
    );
    let sum = lambert_sum(&num, &[lt(1, 0, 0), lt(1, 0, 4)], order)?;
    Ok(&log_one_plus_q(order)? - &sum)
}

/// Reduced bulk free energy written with the couplings:
/// `-K1 - K2 + log Q - log F`.
pub fn bulk_via_couplings(order: i32) -> Result<TruncatedSeries> {
    Ok(&minus_k_sum_plus_log_q(order)? - &bulk_log_f(order)?)
}

/// Vertical surface free energy,
/// `f_s = sum (1-q^n)(w^{2n} - q^{2n} w^{-2n}) / (n(1+q^{2n}))`.
pub fn surface(order: i32) -> Result<TruncatedSeries> {
    let num = pattern_product(&[lt(1, 0, 0), lt(-1, 0, 4)], &[lt(1, 1, 2), lt(-1, -1, 6)]);
    lambert_sum(&num, &[lt(1, 0, 0), lt(1, 0, 8)], order)
}

/// `log G = sum q^n(1+q^n)(w^{2n} - q^{2n} w^{-2n}) / (n(1+q^{2n}))`,
/// with `e^{-f_s} = (1-w^2) G / (1-q^2/w^2)`.
pub fn surface_log_g(order: i32) -> Result<TruncatedSeries> {
    let num = pattern_product(
        &pattern_product(&[lt(1, 0, 4)], &[lt(1, 0, 0), lt(1, 0, 4)]),
        &[lt(1, 1, 2), lt(-1, -1, 6)],
    );
    lambert_sum(&num, &[lt(1, 0, 0), lt(1, 0, 8)], order)
}

/// `f_s = log((1-q^2/w^2)/(1-w^2)) - log G`.
pub fn surface_via_g(order: i32) -> Result<TruncatedSeries> {
    Ok(&(&log1m(1, -1, 6, order)? - &log1m(1, 1, 2, order)?) - &surface_log_g(order)?)
}

/// Horizontal surface free energy,
/// `f'_s = sum q^n(1-q^n)(w^{-2n} - w^{2n}) / (n(1+q^{2n}))`.
pub fn surface_h(order: i32) -> Result<TruncatedSeries> {
    let num = pattern_product(
        &pattern_product(&[lt(1, 0, 4)], &[lt(1, 0, 0), lt(-1, 0, 4)]),
        &[lt(1, -1, -2), lt(-1, 1, 2)],
    );
    lambert_sum(&num, &[lt(1, 0, 0), lt(1, 0, 8)], order)
}

/// Corner free energy, `f_c = -sum (q^n + 4q^{2n} + q^{3n}) / (n(1-q^{4n}))`.
pub fn corner(order: i32) -> Result<TruncatedSeries> {
    let num = [lt(-1, 0, 4), lt(-4, 0, 8), lt(-1, 0, 12)];
    lambert_sum(&num, &[lt(1, 0, 0), lt(-1, 0, 16)], order)
}

/// `e^{-f_c} = prod_{k>=1} 1/((1-q^{4k-3})(1-q^{4k-2})^4(1-q^{4k-1}))`.
pub fn corner_exp_minus(order: i32) -> Result<TruncatedSeries> {
    expand_product(
        &[
            ProductFactor::new(1, 0, 4, 16, -1),
            ProductFactor::new(1, 0, 8, 16, -4),
            ProductFactor::new(1, 0, 12, 16, -1),
        ],
        order,
    )
}

/// `f_c` from the product form.
pub fn corner_via_product(order: i32) -> Result<TruncatedSeries> {
    Ok(-&corner_exp_minus(order)?.log()?)
}

/// The four closed forms through `t^order`, bulk term reduced.
pub fn closed_form_bundle(order: i32) -> Result<SeriesBundle> {
    Ok(SeriesBundle {
        route: Route::ClosedForm,
        f_b_reduced: bulk(order)?,
        f_s: surface(order)?,
        f_s_h: surface_h(order)?,
        f_c: CornerSeries::Known(corner(order)?),
        stabilization: None,
    })
}

/// Isotropic bulk product, reduced:
/// `e^{-f_b}/Q = prod_{k>=1} ((1-q^{2k-1/2})/(1-q^{2k+1/2}))^4 / ((1+q)(1-q^{1/2})^2)`.
pub fn isotropic_bulk_exp_minus(order: i32) -> Result<TruncatedSeries> {
    expand_product(
        &[
            ProductFactor::new(1, 0, 6, 8, 4),
            ProductFactor::new(1, 0, 10, 8, -4),
            ProductFactor::single(1, 0, 2, -2),
            // 1/(1+q) = (1-q)/(1-q^2)
            ProductFactor::single(1, 0, 4, 1),
            ProductFactor::single(1, 0, 8, -1),
        ],
        order,
    )
}

pub fn isotropic_bulk_via_product(order: i32) -> Result<TruncatedSeries> {
    Ok(-&isotropic_bulk_exp_minus(order)?.log()?)
}

/// Isotropic bulk sum, reduced: `log(1+q) - 2 sum q^{n/2}(1-q^n)/(n(1+q^n))`.
pub fn isotropic_bulk(order: i32) -> Result<TruncatedSeries> {
    let sum = lambert_sum(&[lt(2, 0, 2), lt(-2, 0, 6)], &[lt(1, 0, 0), lt(1, 0, 4)], order)?;
    Ok(&log_one_plus_q(order)? - &sum)
}

/// `e^{-f_s} = (1-q^{1/2}) prod_{k>=1} ((1-q^{4k-1/2})/(1-q^{4k-5/2}))^2`.
pub fn isotropic_surface_exp_minus(order: i32) -> Result<TruncatedSeries> {
    expand_product(
        &[
            ProductFactor::single(1, 0, 2, 1),
            ProductFactor::new(1, 0, 14, 16, 2),
            ProductFactor::new(1, 0, 6, 16, -2),
        ],
        order,
    )
}

pub fn isotropic_surface_via_product(order: i32) -> Result<TruncatedSeries> {
    Ok(-&isotropic_surface_exp_minus(order)?.log()?)
}

/// `f_s = sum q^{n/2}(1-q^n)^2 / (n(1+q^{2n}))`.
pub fn isotropic_surface(order: i32) -> Result<TruncatedSeries> {
    let num = [lt(1, 0, 2), lt(-2, 0, 6), lt(1, 0, 10)];
    lambert_sum(&num, &[lt(1, 0, 0), lt(1, 0, 8)], order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::LaurentPolyS;

    const T: i32 = 24;

    fn rq(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn bulk_two_forms_agree() {
        assert!(bulk(T).unwrap().agrees_with(&bulk_via_couplings(T).unwrap()));
    }

    #[test]
    fn surface_two_forms_agree() {
        assert!(surface(T).unwrap().agrees_with(&surface_via_g(T).unwrap()));
    }

    #[test]
    fn rotation_fixes_bulk_and_swaps_surfaces() {
        let b = bulk(T).unwrap();
        assert_eq!(b.invert_s(), b);
        assert_eq!(surface(T).unwrap().invert_s(), surface_h(T).unwrap());
    }

    #[test]
    fn surface_leading_coefficient() {
        let fs = surface(T).unwrap();
        assert_eq!(fs.valuation(), 2);
        assert_eq!(fs.coeff(2), LaurentPolyS::monomial(rq(1, 1), 1));
    }

    #[test]
    fn surface_h_onset() {
        // n = 1 term: q (s^-1 t^-2 - s t^2)(1-q)/(1+q^2) starts at s^-1 t^2
        let fh = surface_h(T).unwrap();
        assert_eq!(fh.valuation(), 2);
        assert_eq!(fh.coeff(2), LaurentPolyS::monomial(rq(1, 1), -1));
    }

    #[test]
    fn corner_first_coefficients() {
        let fc = corner(T).unwrap();
        assert!(fc.is_s_independent());
        assert_eq!(fc.coeff(4), LaurentPolyS::constant(rq(-1, 1)));
        assert_eq!(fc.coeff(8), LaurentPolyS::constant(rq(-9, 2)));
        assert!(fc.agrees_with(&corner_via_product(T).unwrap()));
    }

    #[test]
    fn corner_log_of_product_matches_sum() {
        // the pattern expansion sum_n (q^n + 4 q^{2n} + q^{3n}) / (n (1 - q^{4n})) independently
        let mut acc = TruncatedSeries::zero(T);
        for n in 1..=T / 4 {
            for (c, m) in [(1, 1), (4, 2), (1, 3)] {
                let mut k = 0;
                while 4 * (m * n + 4 * n * k) <= T {
                    acc = &acc + &TruncatedSeries::monomial(rq(c, n as i64), 0, 4 * (m * n + 4 * n * k), T);
                    k += 1;
                }
            }
        }
        assert!(corner_exp_minus(T).unwrap().log().unwrap().agrees_with(&acc));
    }

    #[test]
    fn isotropic_forms() {
        let one = rq(1, 1);
        assert!(isotropic_bulk(T).unwrap().agrees_with(&isotropic_bulk_via_product(T).unwrap()));
        assert!(bulk(T).unwrap().specialize_s(&one).agrees_with(&isotropic_bulk(T).unwrap()));
        assert!(isotropic_surface(T).unwrap().agrees_with(&isotropic_surface_via_product(T).unwrap()));
        assert!(surface(T).unwrap().specialize_s(&one).agrees_with(&isotropic_surface(T).unwrap()));
    }

    #[test]
    fn surface_vanishes_at_w2_eq_q() {
        // w^2 = q means s = t^2; f_s is then zero term by term. Negative
        // s-powers come with at least t^{6|k|}, so the image is complete
        // through T/3.
        let fs = surface(T).unwrap();
        let mut acc = TruncatedSeries::zero(T / 3);
        for (d, p) in fs.terms() {
            for (k, c) in p.terms() {
                acc = &acc + &TruncatedSeries::monomial(c.clone(), 0, d + 2 * k, T / 3);
            }
        }
        assert!(acc.is_zero());
    }
}
