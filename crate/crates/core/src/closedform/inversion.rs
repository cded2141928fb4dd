//! Free energies from the inversion and rotation relations alone.
//!
//! Writing `e^{-f_b} = e^{K1+K2} F`, `e^{-f_s} = (1-W) G / (1-q^2/W)` with
//! `W = w^2`, and assuming `log F`, `log G`, `f_c` are Laurent series
//! `c_0 + sum_n (c_n W^n + d_n W^{-n})` on the annulus `q <= |W| <= 1`, the
//! relations become two linear equations per `n` for `(c_n, d_n)`. Their
//! right-hand sides are logarithms of products of factors `1 - q^a W^{±1}`,
//! which are expanded here coefficient by coefficient.

use num_rational::BigRational;

use super::series::{log_one_plus_q, minus_k_sum_plus_log_q};
use crate::bundle::{CornerSeries, Route, SeriesBundle};
use crate::error::{Error, Result};
use crate::qseries::{LaurentPolyS, QPoly, RatFunc, TruncatedSeries};

/// `mult * log(1 - q^q_pow W^w_pow)` with `w_pow = ±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogFactor {
    pub mult: i64,
    pub q_pow: u32,
    pub w_pow: i32,
}

const fn lf(mult: i64, q_pow: u32, w_pow: i32) -> LogFactor {
    LogFactor { mult, q_pow, w_pow }
}

/// `log[xi e^{-K1(u)-K2(u)-K1(lambda-u)-K2(lambda-u)}] - 2 log(1+q)
///  = log[(1-W)(1-q^2/W) / ((1-qW)(1-q^3/W))]`.
pub const BULK_INVERSION_RHS: [LogFactor; 4] = [lf(1, 0, 1), lf(1, 2, -1), lf(-1, 1, 1), lf(-1, 3, -1)];

/// `log G(W) - log G(1/W) = log[(1-q/W)(1-q^2/W) / ((1-qW)(1-q^2 W))]`, from the
/// inversion relation of `f'_s` combined with the rotation relation.
pub const SURFACE_REFLECTION_RHS: [LogFactor; 4] = [lf(1, 1, -1), lf(1, 2, -1), lf(-1, 1, 1), lf(-1, 2, 1)];

/// Coefficients `(of W^n, of W^{-n})` of `sum mult log(1 - q^a W^{±1})`.
pub fn log_factor_coefficients(factors: &[LogFactor], n: u32) -> (RatFunc, RatFunc) {
    let mut plus = RatFunc::zero();
    let mut minus = RatFunc::zero();
    for f in factors {
        let term = RatFunc::from_poly(QPoly::monomial(
            BigRational::new((-f.mult).into(), (n as i64).into()),
            (f.q_pow * n) as usize,
        ));
        if f.w_pow > 0 {
            plus = &plus + &term;
        } else {
            minus = &minus + &term;
        }
    }
    (plus, minus)
}

/// Exact value of the factor product at rational `(q, W)`.
pub fn log_factor_product(factors: &[LogFactor], q: &BigRational, w2: &BigRational) -> BigRational {
    let mut acc = BigRational::from_integer(1.into());
    for f in factors {
        let qa = crate::scalar::Scalar::powi(q, f.q_pow as i32);
        let x = if f.w_pow > 0 { qa * w2 } else { qa / w2 };
        let base = BigRational::from_integer(1.into()) - x;
        acc *= crate::scalar::Scalar::powi(&base, f.mult as i32);
    }
    acc
}

/// Solve `[a11 a12; a21 a22] (c, d) = (b1, b2)` by Cramer's rule.
fn solve2(a: [[RatFunc; 2]; 2], b: [RatFunc; 2]) -> Result<(RatFunc, RatFunc)> {
    let det = &(&a[0][0] * &a[1][1]) - &(&a[0][1] * &a[1][0]);
    if det.is_zero() {
        return Err(Error::Series("singular coefficient system".into()));
    }
    let c = (&(&(&b[0] * &a[1][1]) - &(&a[0][1] * &b[1])) / &det)?;
    let d = (&(&(&a[0][0] * &b[1]) - &(&b[0] * &a[1][0])) / &det)?;
    Ok((c, d))
}

fn one() -> RatFunc {
    RatFunc::constant(BigRational::from_integer(1.into()))
}

/// Coefficients of `W^n` and `W^{-n}` in `log F`, `log G` and `f_c`.
#[derive(Debug, Clone)]
pub struct InversionCoefficients {
    pub n: u32,
    pub c_b: RatFunc,
    pub d_b: RatFunc,
    pub c_s: RatFunc,
    pub d_s: RatFunc,
    pub c_c: RatFunc,
    pub d_c: RatFunc,
}

/// Solve `c_n + q^{-2n} d_n = rhs`, `d_n = q^n c_n` for the bulk pair.
pub fn solve_bulk(n: u32, rhs: RatFunc) -> Result<(RatFunc, RatFunc)> {
    let k = n as i32;
    solve2([[one(), RatFunc::q_pow(-2 * k)], [-&RatFunc::q_pow(k), one()]], [rhs, RatFunc::zero()])
}

/// Solve the relations for the `n`-th coefficients.
pub fn coefficients(n: u32) -> Result<InversionCoefficients> {
    let k = n as i32;
    let q_n = RatFunc::q_pow(k);
    let q_m2n = RatFunc::q_pow(-2 * k);
    let q_2n = RatFunc::q_pow(2 * k);

    // log F(u) + log F(lambda-u): W -> q^2/W sends d_n W^{-n} to q^{-2n} d_n W^n.
    // log F(u) = log F(lambda/2-u): W -> q/W gives d_n = q^n c_n.
    let (rhs_b, _) = log_factor_coefficients(&BULK_INVERSION_RHS, n);
    let (c_b, d_b) = solve_bulk(n, rhs_b)?;

    // log G(u) + log G(lambda-u) = 0, and the reflection W -> 1/W.
    let (rhs_s, _) = log_factor_coefficients(&SURFACE_REFLECTION_RHS, n);
    let (c_s, d_s) = solve2([[one(), q_m2n.clone()], [one(), -&one()]], [RatFunc::zero(), rhs_s])?;

    // f_c(u) = f_c(lambda-u) and f_c(u) = f_c(lambda/2-u).
    let (c_c, d_c) = solve2(
        [[-&q_2n, one()], [-&q_n, one()]],
        [RatFunc::zero(), RatFunc::zero()],
    )?;
    Ok(InversionCoefficients { n, c_b, d_b, c_s, d_s, c_c, d_c })
}

/// `c_0 + sum_n (c_n W^n + d_n W^{-n})` as a series in `(t, s)`, `W = s t^2`.
fn laurent_in_w(c0: TruncatedSeries, coeffs: &[(RatFunc, RatFunc)], order: i32) -> Result<TruncatedSeries> {
    let mut acc = c0;
    for (i, (c, d)) in coeffs.iter().enumerate() {
        let n = i as i32 + 1;
        let up = c.to_series(order - 2 * n)?;
        let up = up.scale_poly(&LaurentPolyS::monomial(BigRational::from_integer(1.into()), n)).shift_t(2 * n);
        let down = d.to_series(order + 2 * n)?;
        if down.valuation() < 2 * n {
            return Err(Error::Series(format!("W^-{n} coefficient does not carry q^{n}")));
        }
        let down = down
            .scale_poly(&LaurentPolyS::monomial(BigRational::from_integer(1.into()), -n))
            .shift_t(-2 * n);
        acc = &(&acc + &up) + &down;
    }
    Ok(acc.truncate(order))
}

#[derive(Debug, Clone)]
pub struct InversionDerivation {
    /// `c_0` of `log F`, as a series: `log(1+q)`.
    pub c0_b: TruncatedSeries,
    /// `c_0` of `log G`.
    pub c0_s: BigRational,
    pub coefficients: Vec<InversionCoefficients>,
    pub bundle: SeriesBundle,
}

/// Derive `f_b, f_s, f'_s` and the nonconstant part of `f_c` through
/// `t^order`; the constant term of `f_c` is left undetermined.
pub fn derive_from_inversion(order: i32) -> Result<InversionDerivation> {
    if order < 4 {
        return Err(Error::Series("derive_from_inversion needs order >= 4".into()));
    }
    let n_max = (order / 2).max(9) as u32;
    let coefficients: Vec<InversionCoefficients> = (1..=n_max).map(coefficients).collect::<Result<_>>()?;

    // 2 c_0 = 2 log(1+q) for F, 2 c_0 = 0 for G.
    let c0_b = log_one_plus_q(order)?;
    let c0_s = BigRational::from_integer(0.into());

    let fb: Vec<_> = coefficients.iter().map(|c| (c.c_b.clone(), c.d_b.clone())).collect();
    let gs: Vec<_> = coefficients.iter().map(|c| (c.c_s.clone(), c.d_s.clone())).collect();
    let fc: Vec<_> = coefficients.iter().map(|c| (c.c_c.clone(), c.d_c.clone())).collect();

    let log_f = laurent_in_w(c0_b.clone(), &fb, order)?;
    let log_g = laurent_in_w(TruncatedSeries::constant(c0_s.clone(), order), &gs, order)?;
    let fc_rest = laurent_in_w(TruncatedSeries::zero(order), &fc, order)?;

    let f_b_reduced = &minus_k_sum_plus_log_q(order)? - &log_f;
    let one = BigRational::from_integer(1.into());
    let prefactor = &TruncatedSeries::log_one_minus(&one, -1, 6, order)? - &TruncatedSeries::log_one_minus(&one, 1, 2, order)?;
    let f_s = &prefactor - &log_g;
    let f_s_h = f_s.invert_s();
    Ok(InversionDerivation {
        c0_b,
        c0_s,
        coefficients,
        bundle: SeriesBundle {
            route: Route::Inversion,
            f_b_reduced,
            f_s,
            f_s_h,
            f_c: CornerSeries::UndeterminedConstant { rest: fc_rest },
            stabilization: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::series;
    use crate::params::SpectralParams;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn bulk_factorization_matches_xi_and_couplings() {
        for (t, s) in [(r(1, 2), r(9, 4)), (r(1, 3), r(4, 9)), (r(2, 3), r(1, 1))] {
            let sp = SpectralParams::from_ts(t, s).unwrap();
            let c = sp.couplings().unwrap();
            let ci = sp.inversion_image().couplings().unwrap();
            let lhs = sp.xi().unwrap() / (c.exp_k1 * c.exp_k2 * ci.exp_k1 * ci.exp_k2);
            let one_plus_q = BigRational::from_integer(1.into()) + sp.q().clone();
            let rhs = one_plus_q.clone() * one_plus_q * log_factor_product(&BULK_INVERSION_RHS, sp.q(), &sp.w2());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn surface_factorization_matches_delta_ratio() {
        // log G(W) - log G(1/W) = -f_s(v) + f_s(-v) - log P(W) + log P(1/W),
        // with -f_s(v) + f_s(-v) = log Delta(lambda-u)/Delta(u) at W_u = q/W.
        for (t, s) in [(r(1, 2), r(9, 4)), (r(1, 3), r(4, 9))] {
            let sp = SpectralParams::from_ts(t, s).unwrap();
            let q = sp.q().clone();
            let w2 = sp.w2();
            let one = BigRational::from_integer(1.into());
            let rot = sp.rotation_image();
            let delta_ratio = rot.inversion_image().delta().unwrap() / rot.delta().unwrap();
            let p = |x: &BigRational| (one.clone() - x.clone()) / (one.clone() - q.clone() * q.clone() / x.clone());
            let lhs = delta_ratio * p(&(one.clone() / w2.clone())) / p(&w2);
            assert_eq!(lhs, log_factor_product(&SURFACE_REFLECTION_RHS, &q, &w2));
        }
    }

    #[test]
    fn coefficients_against_closed_expressions() {
        let qp = |k: usize| QPoly::monomial(BigRational::from_integer(1.into()), k);
        let one = QPoly::constant(BigRational::from_integer(1.into()));
        for n in 1..=9u32 {
            let k = n as usize;
            let c = coefficients(n).unwrap();
            let nn = RatFunc::constant(r(n as i64, 1));
            // |c_n^(b)| = q^n (1-q^n) / (n (1+q^n)), with d = q^n c
            let mag = (&RatFunc::from_poly(&qp(k) * &(&one + &(-&qp(k))))
                / &(&nn * &RatFunc::from_poly(&one + &qp(k))))
                .unwrap();
            assert_eq!(c.c_b, -&mag, "n={n}");
            assert_eq!(c.d_b, &RatFunc::q_pow(n as i32) * &c.c_b);
            let cs = (&RatFunc::from_poly(&qp(k) * &(&one + &qp(k))) / &(&nn * &RatFunc::from_poly(&one + &qp(2 * k))))
                .unwrap();
            assert_eq!(c.c_s, cs);
            assert_eq!(c.d_s, -&(&RatFunc::q_pow(2 * n as i32) * &cs));
            assert!(c.c_c.is_zero() && c.d_c.is_zero());
        }
    }

    #[test]
    fn bundle_matches_closed_forms() {
        let t = 20;
        let d = derive_from_inversion(t).unwrap();
        assert!(d.bundle.f_b_reduced.agrees_with(&series::bulk(t).unwrap()));
        assert!(d.bundle.f_s.agrees_with(&series::surface(t).unwrap()));
        assert!(d.bundle.f_s_h.agrees_with(&series::surface_h(t).unwrap()));
        match &d.bundle.f_c {
            CornerSeries::UndeterminedConstant { rest } => assert!(rest.is_zero()),
            CornerSeries::Known(_) => panic!("corner constant must stay undetermined"),
        }
        assert_eq!(d.c0_s, BigRational::from_integer(0.into()));
    }
}
