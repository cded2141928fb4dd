//! Behaviour near `Q = 4`: the `Q < 4` surface integral, the singular part of
//! the continued surface free energy, the conjugate-modulus form of the
//! corner free energy and its divergence as `Q -> 4+`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::numeric::{corner, corner_exp_minus_product, tolerance};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `Q < 4` parameters: `Q^{1/2} = 2 cos mu`, `x = sin v / sin(mu - v)`.
/// Continuing to `Q > 4` takes `mu = -i lambda`, `v = -i(lambda - 2u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalParams {
    pub mu: f64,
    pub v: f64,
}

impl CriticalParams {
    /// Requires the physical regime `0 < v < mu < pi/2`.
    pub fn new(mu: f64, v: f64) -> Result<Self> {
        if !(0.0 < v && v < mu && mu < PI / 2.0) {
            return Err(Error::Domain(format!("need 0 < v < mu < pi/2, got mu = {mu}, v = {v}")));
        }
        Ok(CriticalParams { mu, v })
    }

    pub fn potts_q(&self) -> f64 {
        4.0 * self.mu.cos().powi(2)
    }

    pub fn x(&self) -> f64 {
        self.v.sin() / (self.mu - self.v).sin()
    }
}

/// `q = e^{-2 pi eps}` and its conjugate `q' = e^{-2 pi / eps}`, so that
/// `(ln q)(ln q') = 4 pi^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugatePair<S> {
    pub eps: S,
    pub q: S,
    pub qprime: S,
}

impl<S: Real> ConjugatePair<S> {
    pub fn new(eps: S) -> Result<Self> {
        if eps <= S::zero() {
            return Err(Error::Domain("eps must be positive".into()));
        }
        let two_pi = S::from_i64(2) * S::pi();
        let q = (-(two_pi.clone() * eps.clone())).exp();
        let qprime = (-(two_pi / eps.clone())).exp();
        Ok(ConjugatePair { eps, q, qprime })
    }

    /// `q'^{1/k}`.
    fn qprime_root(&self, k: i64) -> S {
        (-(S::from_i64(2) * S::pi() / (S::from_i64(k) * self.eps.clone()))).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceIntegral {
    pub value: f64,
    pub log_term: f64,
    pub integral: f64,
    pub error_estimate: f64,
}

fn ln_sinh(x: f64) -> f64 {
    x + (-(-2.0 * x).exp_m1() / 2.0).ln()
}

fn ln_cosh(x: f64) -> f64 {
    x + ((1.0 + (-2.0 * x).exp()) / 2.0).ln()
}

/// The even integrand
/// `2 sinh(2vy) sinh((pi-2mu)y) cosh((pi-mu)y) cosh(mu y) / (y sinh(2 pi y) cosh(2 mu y))`,
/// evaluated through logarithms so that large `y` does not overflow.
pub fn surface_integrand(cp: &CriticalParams, y: f64) -> f64 {
    let (mu, v) = (cp.mu, cp.v);
    let y = y.abs();
    if y < 1e-9 {
        return 2.0 * v * (PI - 2.0 * mu) / PI;
    }
    let l = ln_sinh(2.0 * v * y) + ln_sinh((PI - 2.0 * mu) * y) + ln_cosh((PI - mu) * y) + ln_cosh(mu * y)
        - ln_sinh(2.0 * PI * y)
        - ln_cosh(2.0 * mu * y);
    2.0 * l.exp() / y
}

const QUAD_TARGET: f64 = 1e-13;
const QUAD_LIMIT: f64 = 1e-10;

/// `int_0^inf g(y) dy` through `y = x/(1-x)`.
fn half_line(g: impl Fn(f64) -> f64) -> quadrature::Output {
    quadrature::integrate(
        |x| {
            let d = 1.0 - x;
            if d <= 0.0 {
                return 0.0;
            }
            g(x / d) / (d * d)
        },
        0.0,
        1.0,
        QUAD_TARGET,
    )
}

/// `int_{-inf}^{inf} g(y) dy` through `y = x/(1-x^2)`, without using evenness.
pub fn full_line(g: impl Fn(f64) -> f64) -> quadrature::Output {
    quadrature::integrate(
        |x| {
            let d = 1.0 - x * x;
            if d <= 0.0 {
                return 0.0;
            }
            g(x / d) * (1.0 + x * x) / (d * d)
        },
        -1.0,
        1.0,
        QUAD_TARGET,
    )
}

/// Surface free energy for `Q < 4`:
/// `f_s = log(sin((mu+v)/2) / sin((mu-v)/2)) - int_{-inf}^{inf} (integrand) dy`.
pub fn ob_surface_integral(cp: &CriticalParams) -> Result<SurfaceIntegral> {
    let out = half_line(|y| surface_integrand(cp, y));
    let integral = 2.0 * out.integral;
    let error_estimate = 2.0 * out.error_estimate;
    if !(error_estimate <= QUAD_LIMIT) || !integral.is_finite() {
        return Err(Error::Convergence(format!("surface integral error estimate {error_estimate:e}")));
    }
    let log_term = (((cp.mu + cp.v) / 2.0).sin() / ((cp.mu - cp.v) / 2.0).sin()).ln();
    Ok(SurfaceIntegral { value: log_term - integral, log_term, integral, error_estimate })
}

/// Real envelope of the correction to the continued surface free energy:
/// each odd-`n` term with its coefficient `i ± 1` replaced by the common
/// modulus `sqrt 2`.
pub fn singular_envelope(lambda: f64, u: f64) -> f64 {
    let mut acc = 0.0;
    let mut n = 1;
    loop {
        let nf = n as f64;
        let e = (-PI * PI * nf / (2.0 * lambda)).exp();
        let term = 4.0 * 2f64.sqrt() * (PI * nf * (lambda - 2.0 * u) / (2.0 * lambda)).sinh().abs() * e / (nf * (1.0 - e));
        acc += term;
        if term < 1e-17 * acc || n > 10_000 {
            return acc;
        }
        n += 2;
    }
}

/// The correction sum with its complex coefficient `[i + (-1)^{(n-1)/2}]`
/// kept as printed.
#[cfg(feature = "verbatim-continuation")]
pub fn singular_verbatim(lambda: f64, u: f64) -> num_complex::Complex64 {
    use num_complex::Complex64;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut n = 1;
    loop {
        let nf = n as f64;
        let sign = if (n - 1) / 2 % 2 == 0 { 1.0 } else { -1.0 };
        let e = (-PI * PI * nf / (2.0 * lambda)).exp();
        let mag = 4.0 * (PI * nf * (lambda - 2.0 * u) / (2.0 * lambda)).sinh() * e / (nf * (1.0 - e));
        let term = Complex64::new(sign, 1.0) * mag;
        acc += term;
        if term.norm() < 1e-17 * acc.norm() || n > 10_000 {
            return acc;
        }
        n += 2;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationCheck {
    pub u_frac: f64,
    /// `(lambda, magnitude of the correction)`.
    pub samples: Vec<(f64, f64)>,
    /// Largest difference between the two forms of the regular part on the samples.
    pub regular_difference: f64,
    /// Fitted decay rate `-d ln|correction| / d(1/lambda)`.
    pub rate: f64,
    pub expected_rate: f64,
    pub relative_error: f64,
    pub verbatim: bool,
}

fn correction_magnitude(lambda: f64, u: f64) -> f64 {
    #[cfg(feature = "verbatim-continuation")]
    {
        singular_verbatim(lambda, u).norm()
    }
    #[cfg(not(feature = "verbatim-continuation"))]
    {
        singular_envelope(lambda, u)
    }
}

/// Fits `ln|correction|` against `1/lambda` over `points` values of
/// `lambda` spread evenly on `[lo, hi]` at fixed `u/lambda`; the expected
/// slope is `-pi^2/2`. Also compares the two forms of the regular part
/// (the plain sum and `log`-prefactor form) at each sample.
pub fn fs_continuation_check(lo: f64, hi: f64, points: usize, u_frac: f64) -> Result<ContinuationCheck> {
    if !(0.0 < lo && lo < hi) || points < 3 || !(0.0 < u_frac && u_frac < 0.5) {
        return Err(Error::Domain("need 0 < lo < hi, at least 3 points and 0 < u/lambda < 1/2".into()));
    }
    if (-PI * PI / (2.0 * lo)).exp() < 1e-290 {
        return Err(Error::Domain(format!("correction underflows at lambda = {lo}")));
    }
    let mut samples = Vec::with_capacity(points);
    let mut regular_difference = 0.0f64;
    for k in 0..points {
        let lambda = lo + (hi - lo) * k as f64 / (points - 1) as f64;
        let u = u_frac * lambda;
        let sp = crate::params::SpectralParams::from_lambda_u(lambda, u)?;
        let a = super::numeric::surface(&sp)?;
        let b = super::numeric::surface_via_g(&sp)?;
        regular_difference = regular_difference.max((a - b).abs());
        samples.push((lambda, correction_magnitude(lambda, u)));
    }
    let xs: Vec<f64> = samples.iter().map(|(l, _)| 1.0 / l).collect();
    let ys: Vec<f64> = samples.iter().map(|(_, c)| c.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let rate = -sxy / sxx;
    let expected_rate = PI * PI / 2.0;
    Ok(ContinuationCheck {
        u_frac,
        samples,
        regular_difference,
        rate,
        expected_rate,
        relative_error: (rate / expected_rate - 1.0).abs(),
        verbatim: cfg!(feature = "verbatim-continuation"),
    })
}

/// `prod_{k>=1} (1 - a r^{k-1})` for `0 <= a, r < 1`, stopped once the
/// remaining factors are within the working precision of 1.
fn product<S: Real>(a: S, r: S) -> S {
    let tol = tolerance::<S>() * 1e-3;
    let rf = r.to_f64();
    let mut acc = S::one();
    let mut term = a;
    loop {
        if term.abs().to_f64() < tol * (1.0 - rf) {
            return acc;
        }
        acc = acc * (S::one() - term.clone());
        term = term * r.clone();
    }
}

/// Euler function `prod_{n>=1} (1 - q^n)`.
pub fn euler<S: Real>(q: &S) -> S {
    product(q.clone(), q.clone())
}

/// `prod_{k>=1} (1 - q^{2k-1})`.
pub fn odd_product<S: Real>(q: &S) -> S {
    product(q.clone(), q.clone() * q.clone())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusCheck {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relative_difference: f64,
}

fn check<S: Real>(id: &str, lhs: S, rhs: S) -> ModulusCheck {
    let rel = ((lhs.clone() - rhs.clone()) / lhs.clone()).abs().to_f64();
    ModulusCheck { id: id.to_string(), lhs: lhs.to_f64(), rhs: rhs.to_f64(), relative_difference: rel }
}

/// Both sides of the conjugate-modulus identities at `q = e^{-2 pi eps}`.
///
/// The forms with `P(q'^{1/2})` dividing in the `P(q)` relation (and
/// multiplying in the corner relation) are the ones that hold; the
/// reciprocal placement is reported as well under ids ending in
/// `as-printed`.
pub fn conjugate_modulus<S: Real>(eps: S) -> Result<Vec<ModulusCheck>> {
    let cp = ConjugatePair::new(eps)?;
    let (e, q) = (cp.eps.clone(), cp.q.clone());
    let pi = S::pi();
    let two = S::from_i64(2);
    let twelve = S::from_i64(12);

    let euler_rhs = (pi.clone() * (e.clone() - S::one() / e.clone()) / twelve.clone()).exp() / e.sqrt() * euler(&cp.qprime);
    let p_q = odd_product(&q);
    let p_half = odd_product(&cp.qprime_root(2));
    let p_quarter = odd_product(&cp.qprime_root(4));
    let pref = two.sqrt() * (-(pi.clone() * e.clone() / twelve) - pi.clone() / (S::from_i64(24) * e.clone())).exp();

    let direct = corner_exp_minus_product(&q)?;
    let scale = (S::from_i64(3) * pi.clone() * e.clone() / S::from_i64(4) + pi / (S::from_i64(8) * e)).exp()
        / two.powi(2)
        / two.sqrt();
    let p4 = p_quarter.powi(4);
    Ok(vec![
        check("euler-conjugate", euler(&q), euler_rhs),
        check("odd-product-ratio", p_q.clone(), euler(&q) / euler(&(q.clone() * q.clone()))),
        check("odd-product-conjugate", p_q.clone(), pref.clone() / p_half.clone()),
        check("odd-product-conjugate-as-printed", p_q.clone(), pref * p_half.clone()),
        check("corner-product", direct.clone(), S::one() / (p_q * odd_product(&(q.clone() * q)).powi(4))),
        check("corner-conjugate", direct.clone(), scale.clone() * p_half.clone() * p4.clone()),
        check("corner-conjugate-as-printed", direct, scale / (p_half * p4)),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FcAsymptote {
    pub eps: f64,
    pub value: f64,
    pub asymptote: f64,
    pub ratio: f64,
    /// `-pi/(8 eps) - 3 pi eps/4 + (5/2) ln 2` minus the logs of the
    /// conjugate products: the same value without the `q`-sum.
    pub modular_value: f64,
}

/// `f_c` at `q = e^{-2 pi eps}` from its `q`-sum and its ratio to `-pi/(8 eps)`.
pub fn fc_asymptote(eps: f64) -> Result<FcAsymptote> {
    let cp = ConjugatePair::new(eps)?;
    let value = corner(&cp.q)?;
    let asymptote = -PI / (8.0 * eps);
    let modular_value = asymptote - 3.0 * PI * eps / 4.0 + 2.5 * 2f64.ln()
        - odd_product(&cp.qprime_root(2)).ln()
        - 4.0 * odd_product(&cp.qprime_root(4)).ln();
    Ok(FcAsymptote { eps, value, asymptote, ratio: value / asymptote, modular_value })
}
