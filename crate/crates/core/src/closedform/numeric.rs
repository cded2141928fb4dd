//! Closed forms evaluated as numbers.
//!
//! Every infinite sum is a Lambert-type sum whose `n`-th term is bounded by
//! `C r^n / n`; summation stops once the geometric tail bound
//! `C r^{n+1} / ((n+1)(1-r))` falls below the tolerance relative to the
//! partial sum.

use crate::bundle::{NumericBundle, Route};
use crate::error::{Error, Result};
use crate::params::SpectralParams;
use crate::scalar::Real;

const MAX_TERMS: i32 = 10_000_000;

/// Relative stopping tolerance for a scalar type.
pub fn tolerance<S: Real>() -> f64 {
    S::epsilon().min(1e-16)
}

/// Compensated (Neumaier) accumulator.
#[derive(Clone)]
pub struct Accumulator<S> {
    sum: S,
    comp: S,
}

impl<S: Real> Default for Accumulator<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Real> Accumulator<S> {
    pub fn new() -> Self {
        Accumulator { sum: S::zero(), comp: S::zero() }
    }

    pub fn add(&mut self, x: S) {
        let t = self.sum.clone() + x.clone();
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp.clone() + ((self.sum.clone() - t.clone()) + x);
        } else {
            self.comp = self.comp.clone() + ((x - t.clone()) + self.sum.clone());
        }
        self.sum = t;
    }

    pub fn value(&self) -> S {
        self.sum.clone() + self.comp.clone()
    }
}

/// `sum_{n>=1} term(n)` given `|term(n)| <= c r^n / n`.
pub fn lambert_numeric<S: Real>(r: f64, c: f64, mut term: impl FnMut(i32) -> S) -> Result<S> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain(format!("sum does not converge: ratio {r} >= 1")));
    }
    let tol = tolerance::<S>();
    let mut acc = Accumulator::new();
    for n in 1..=MAX_TERMS {
        acc.add(term(n));
        let nf = n as f64 + 1.0;
        let bound = c * r.powf(nf) / (nf * (1.0 - r));
        let scale = acc.value().abs().to_f64().max(f64::MIN_POSITIVE);
        if bound < tol * scale || bound == 0.0 {
            return Ok(acc.value());
        }
    }
    Err(Error::Convergence(format!("sum with ratio {r} needs more than {MAX_TERMS} terms")))
}

fn two<S: Real>() -> S {
    S::from_i64(2)
}

struct Pts<S> {
    q: S,
    w2: S,
    qf: f64,
    wf: f64,
}

fn pts<S: Real>(sp: &SpectralParams<S>) -> Pts<S> {
    let w2 = sp.w2();
    Pts { qf: sp.q().to_f64(), wf: w2.to_f64(), q: sp.q().clone(), w2 }
}

/// `f_b = log(q/(1+q)) - sum (1-q^n)(W^n + q^n W^{-n}) / (n(1+q^n))`; needs `q < W < 1`.
pub fn bulk<S: Real>(sp: &SpectralParams<S>) -> Result<S> {
    let p = pts(sp);
    let r = p.wf.max(p.qf / p.wf);
    let (q, w2) = (p.q.clone(), p.w2.clone());
    let sum = lambert_numeric(r, 2.0, |n| {
        let qn = q.powi(n);
        (S::one() - qn.clone()) * (w2.powi(n) + (q.clone() / w2.clone()).powi(n))
            / (S::from_i64(n as i64) * (S::one() + qn))
    })?;
    Ok((p.q.clone() / (S::one() + p.q)).ln() - sum)
}

/// `log F = log(1+q) - sum q^n(1-q^n)(W^n + q^n W^{-n}) / (n(1+q^n))`; needs `q^2 < W < 1/q`.
pub fn bulk_log_f<S: Real>(sp: &SpectralParams<S>) -> Result<S> {
    let p = pts(sp);
    let r = (p.qf * p.wf).max(p.qf * p.qf / p.wf);
    let (q, w2) = (p.q.clone(), p.w2.clone());
    let sum = lambert_numeric(r, 2.0, |n| {
        let qn = q.powi(n);
        qn.clone() * (S::one() - qn.clone()) * (w2.powi(n) + (q.clone() / w2.clone()).powi(n))
            / (S::from_i64(n as i64) * (S::one() + qn))
    })?;
    Ok((S::one() + p.q).ln() - sum)
}

/// `f_b = -K1 - K2 - log F`.
pub fn bulk_via_couplings<S: Real>(sp: &SpectralParams<S>) -> Result<S> {
    let c = sp.couplings()?;
    if c.exp_k1 <= S::zero() || c.exp_k2 <= S::zero() {
        return Err(Error::Domain("couplings are not real outside the physical strip".into()));
    }
    Ok(-c.k1() - c.k2() - bulk_log_f(sp)?)
}

/// `e^{-f_b} = e^{K1+K2} F`, valid wherever `log F` converges.
pub fn bulk_exp_minus<S: Real>(sp: &SpectralParams<S>) -> Result<S> {
    let c = sp.couplings()?;
    Ok(c.exp_k1 * c.exp_k2 * bulk_log_f(sp)?.exp())
}

/// `f_s = sum (1-q^n)(W^n - q^{2n} W^{-n}) / (n(1+q^{2n}))`; needs `q^2 < W < 1`.
pub fn surface<S: Real>(sp: &SpectralParams<S>) -> Result<S> {
    let p = pts(sp);
    let r = p.wf.max(p.qf * p.qf / p.wf);
    let (q, w2) = (p.q.clone(), p.w2.clone());
    lambert_numeric(r, 2.0, |n| {
        let qn = q.powi(n);
        (S::one() - qn.clone()) * (w2.powi(n) - (q.clone() * q.clone() / w2.clone()).powi(n))
            / (S::from_i64(n as i64) * (S::one() + qn.clone() * qn))
    })
}

/// `log G = sum q^n(1+q^n)(W^n - q^{2n} W^{-n}) / (n(1+q^{2n}))`; needs `q^3 < W < 1/q`.
pub fn surface_log_g<S: Real>(sp: &SpectralParams<S>) -> Result<S> {
    let p = pts(sp);
    let r = (p.qf * p.wf).max(p.qf.powi(3) / p.wf);
    let (q, w2) = (p.q.clone(), p.w2.clone());
    lambert_numeric(r, 4.0, |n| {
        let qn = q.powi(n);
        qn.clone() * (S::one() + qn.clone()) * (w2.powi(n) - (q.clone() * q.clone() / w2.clone()).powi(n))
            / (S::from_i64(n as i64) * (S::one() + qn.clone() * qn))
    })
}

/// `f_s = log((1-q^2/W)/(1-W)) - log G`.
pub fn surface_via_g<S: Real>(sp: &SpectralParams<S>) -> Result<S> {
    let p = pts(sp);
    let ratio = (S::one() - p.q.clone() * p.q.clone() / p.w2.clone()) / (S::one() - p.w2.clone());
    if ratio <= S::zero() {
        return Err(Error::Domain("log prefactor of f_s is not real here".into()));
    }
    Ok(ratio.ln() - surface_log_g(sp)?)
}

/// `e^{-f_s} = (1-W) G / (1-q^2/W)`.
pub fn surface_exp_minus<S: Real>(sp: &SpectralParams<S>) -> Result<S> {
    let p = pts(sp);
    Ok((S::one() - p.w2.clone()) * surface_log_g(sp)?.exp() / (S::one() - p.q.clone() * p.q / p.w2))
}

/// `f'_s = sum q^n(1-q^n)(W^{-n} - W^n) / (n(1+q^{2n}))`; needs `q < W < 1/q`.
pub fn surface_h<S: Real>(sp: &SpectralParams<S>) -> Result<S> {
    let p = pts(sp);
    let r = (p.qf / p.wf).max(p.qf * p.wf);
    let (q, w2) = (p.q.clone(), p.w2.clone());
    lambert_numeric(r, 2.0, |n| {
        let qn = q.powi(n);
        qn.clone() * (S::one() - qn.clone()) * (w2.powi(-n) - w2.powi(n))
            / (S::from_i64(n as i64) * (S::one() + qn.clone() * qn))
    })
}

/// `e^{-f'_s}` through the rotation image of `e^{-f_s}`:
/// `(1-q/W) G(q/W) / (1-qW)`.
pub fn surface_h_exp_minus<S: Real>(sp: &SpectralParams<S>) -> Result<S> {
    surface_exp_minus(&sp.rotation_image())
}

/// `f_c = -sum (q^n + 4q^{2n} + q^{3n}) / (n(1-q^{4n}))`.
pub fn corner<S: Real>(q: &S) -> Result<S> {
    let qf = q.to_f64();
    if !(qf > 0.0 && qf < 1.0) {
        return Err(Error::Domain(format!("q = {qf} outside (0, 1)")));
    }
    let c = 6.0 / (1.0 - qf.powi(4));
    let sum = lambert_numeric(qf, c, |n| {
        let qn = q.powi(n);
        let q2 = qn.clone() * qn.clone();
        (qn.clone() + S::from_i64(4) * q2.clone() + q2.clone() * qn) / (S::from_i64(n as i64) * (S::one() - q2.clone() * q2))
    })?;
    Ok(-sum)
}

/// `e^{-f_c} = prod_{k>=1} 1/((1-q^{4k-3})(1-q^{4k-2})^4(1-q^{4k-1}))`.
pub fn corner_exp_minus_product<S: Real>(q: &S) -> Result<S> {
    let qf = q.to_f64();
    if !(qf > 0.0 && qf < 1.0) {
        return Err(Error::Domain(format!("q = {qf} outside (0, 1)")));
    }
    let tol = tolerance::<S>();
    let mut log_acc = Accumulator::new();
    let mut k = 1;
    loop {
        let a = q.powi(4 * k - 3);
        let b = q.powi(4 * k - 2);
        let c = q.powi(4 * k - 1);
        let factor = (S::one() - a.clone()) * (S::one() - b.clone()).powi(4) * (S::one() - c);
        log_acc.add(-factor.ln());
        // remaining factors contribute at most 6 q^{4k+1}/(1-q^4)(1-q)
        if 6.0 * qf.powi(4 * k + 1) / ((1.0 - qf.powi(4)) * (1.0 - qf)) < tol || k > MAX_TERMS {
            break;
        }
        k += 1;
    }
    Ok(log_acc.value().exp())
}

/// Isotropic bulk product: `e^{-f_b} = (1+q)/(q(1-q^{1/2})^2) prod ((1-q^{2k-1/2})/(1-q^{2k+1/2}))^4`.
pub fn isotropic_bulk_exp_minus<S: Real>(q: &S) -> S {
    let t2 = q.sqrt();
    let tol = tolerance::<S>();
    let mut log_acc = Accumulator::new();
    let mut k = 1;
    while t2.to_f64().powi(4 * k - 1) > tol * 1e-2 {
        let num = S::one() - t2.powi(4 * k - 1);
        let den = S::one() - t2.powi(4 * k + 1);
        log_acc.add(S::from_i64(4) * (num / den).ln());
        k += 1;
    }
    (S::one() + q.clone()) / (q.clone() * (S::one() - t2.clone()).powi(2)) * log_acc.value().exp()
}

/// Isotropic surface product: `e^{-f_s} = (1-q^{1/2}) prod ((1-q^{4k-1/2})/(1-q^{4k-5/2}))^2`.
pub fn isotropic_surface_exp_minus<S: Real>(q: &S) -> S {
    let t2 = q.sqrt();
    let tol = tolerance::<S>();
    let mut log_acc = Accumulator::new();
    let mut k = 1;
    while t2.to_f64().powi(8 * k - 5) > tol * 1e-2 {
        let num = S::one() - t2.powi(8 * k - 1);
        let den = S::one() - t2.powi(8 * k - 5);
        log_acc.add(two::<S>() * (num / den).ln());
        k += 1;
    }
    (S::one() - t2) * log_acc.value().exp()
}

/// All four closed forms at one point of the physical strip.
pub fn bundle(sp: &SpectralParams<f64>) -> Result<NumericBundle> {
    Ok(NumericBundle {
        route: Route::ClosedForm,
        q: *sp.q(),
        s: sp.s(),
        f_b: bulk(sp)?,
        f_s: surface(sp)?,
        f_s_h: surface_h(sp)?,
        f_c: Some(corner(sp.q())?),
        physical: sp.is_physical(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{HpFloat, Scalar};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
    }

    fn sp(q: f64, s: f64) -> SpectralParams<f64> {
        SpectralParams::from_ts(q.powf(0.25), s).unwrap()
    }

    #[test]
    fn bulk_two_forms() {
        for (q, s) in [(0.2, 1.0), (0.2, 2.0), (0.05, 0.5), (0.6, 1.1)] {
            let p = sp(q, s);
            assert!(close(bulk(&p).unwrap(), bulk_via_couplings(&p).unwrap(), 1e-13), "{q} {s}");
        }
    }

    #[test]
    fn surface_two_forms() {
        for (q, s) in [(0.2, 1.0), (0.2, 2.0), (0.05, 0.5), (0.6, 1.1)] {
            let p = sp(q, s);
            assert!(close(surface(&p).unwrap(), surface_via_g(&p).unwrap(), 1e-13), "{q} {s}");
            assert!(close(surface_h(&p).unwrap(), surface(&p.rotation_image()).unwrap(), 1e-13));
        }
    }

    #[test]
    fn isotropic_products() {
        let q = 0.2f64;
        let p = sp(q, 1.0);
        assert!(close((-bulk(&p).unwrap()).exp(), isotropic_bulk_exp_minus(&q), 1e-13));
        assert!(close((-surface(&p).unwrap()).exp(), isotropic_surface_exp_minus(&q), 1e-13));
        assert!(close(surface(&p).unwrap(), surface_h(&p).unwrap(), 1e-14));
    }

    #[test]
    fn corner_two_routes() {
        let q = 0.3f64;
        assert!(close((-corner(&q).unwrap()).exp(), corner_exp_minus_product(&q).unwrap(), 1e-13));
        assert!(corner(&1e-12f64).unwrap().abs() < 2e-12);
    }

    #[test]
    fn surface_h_at_w2_eq_q_diverges_logarithmically() {
        // terms of sum (1-q^n)(1-q^{2n})/(n(1+q^{2n})) tend to 1/n, so doubling
        // the cutoff adds ln 2 rather than settling
        let q = 0.2f64;
        let plain = |m: i32| -> f64 {
            (1..=m).map(|n| (1.0 - q.powi(n)) * (1.0 - q.powi(2 * n)) / (n as f64 * (1.0 + q.powi(2 * n)))).sum()
        };
        assert!((plain(2000) - plain(1000) - 2f64.ln()).abs() < 1e-3);
        let p = SpectralParams::from_qw(q, q.sqrt()).unwrap();
        assert!(surface_h(&p).is_err());
        assert!(surface(&p).unwrap().abs() < 1e-15);
    }

    #[test]
    fn sums_reject_divergent_points() {
        let p = SpectralParams::from_qw(0.2f64, 1.2).unwrap();
        assert!(bulk(&p).is_err());
    }

    #[test]
    fn high_precision_agrees_with_f64() {
        let q = HpFloat::from_f64(0.2);
        let t = q.sqrt().sqrt();
        let p = SpectralParams::from_ts(t, HpFloat::from_f64(2.0)).unwrap();
        let hp = bulk(&p).unwrap();
        let hp2 = bulk_via_couplings(&p).unwrap();
        assert!((hp.clone() - hp2).abs() < HpFloat::from_f64(1e-60));
        assert!(close(hp.to_f64(), bulk(&sp(0.2, 2.0)).unwrap(), 1e-14));
    }
}
