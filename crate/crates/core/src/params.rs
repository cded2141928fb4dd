//! Parameterizations of the self-dual Potts model.
//!
//! The canonical coordinates are `(q, w)` with `q = e^{-2 lambda}` and
//! `w = e^{-2u}`. Everything else (lambda, u, the grading variable
//! `t = q^{1/4}`, the anisotropy `s = w^2 / q^{1/2}`, the state count `Q`,
//! the couplings) is a derived view. In `(t, s)` coordinates the physical
//! strip `q < w^2 < 1` reads `t^2 < s < t^{-2}`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Pole, Result};
use crate::scalar::{Real, Scalar};

/// Relative distance to `w^2 in {1, q}` below which a coupling is treated as
/// sitting on its pole.
pub const POLE_TOLERANCE: f64 = 1e-10;

/// A point `(q, w)` of the spectral plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralParams<S> {
    q: S,
    w: S,
    t: S,
}

impl<S: Scalar> SpectralParams<S> {
    /// Requires `0 < q < 1` and `w > 0`. For exact scalars `q` must be a
    /// perfect fourth power so that `t = q^{1/4}` stays in the field.
    pub fn from_qw(q: S, w: S) -> Result<Self> {
        if !(q > S::zero() && q < S::one()) {
            return domain(format!("q = {:?} is outside (0, 1)", q.to_f64()));
        }
        if w <= S::zero() {
            return domain(format!("w = {:?} must be positive", w.to_f64()));
        }
        let t = q
            .sqrt_checked()
            .and_then(|r| r.sqrt_checked())
            .ok_or_else(|| Error::Domain(format!("q^(1/4) is not representable for q = {:?}", q.to_f64())))?;
        Ok(SpectralParams { q, w, t })
    }

    /// Builds the point from the grading variable and the anisotropy:
    /// `q = t^4`, `w^2 = s t^2`.
    pub fn from_ts(t: S, s: S) -> Result<Self> {
        if !(t > S::zero() && t < S::one()) {
            return domain(format!("t = {:?} is outside (0, 1)", t.to_f64()));
        }
        if s <= S::zero() {
            return domain(format!("s = {:?} must be positive", s.to_f64()));
        }
        let w = (s * t.clone() * t.clone())
            .sqrt_checked()
            .ok_or_else(|| Error::Domain("w = (s t^2)^(1/2) is not representable".into()))?;
        let q = t.clone().powi(4);
        Ok(SpectralParams { q, w, t })
    }

    pub fn q(&self) -> &S {
        &self.q
    }

    pub fn w(&self) -> &S {
        &self.w
    }

    /// `t = q^{1/4}`.
    pub fn t(&self) -> &S {
        &self.t
    }

    pub fn w2(&self) -> S {
        self.w.clone() * self.w.clone()
    }

    /// `q^{1/2} = t^2`.
    pub fn sqrt_q(&self) -> S {
        self.t.clone() * self.t.clone()
    }

    /// `s = w^2 / q^{1/2}`.
    pub fn s(&self) -> S {
        self.w2() / self.sqrt_q()
    }

    /// `Q = q + 2 + 1/q`.
    pub fn potts_q(&self) -> S {
        self.q.clone() + S::from_i64(2) + S::one() / self.q.clone()
    }

    /// `Q^{1/2} = 2 cosh(lambda) = t^{-2} + t^2`.
    pub fn sqrt_potts_q(&self) -> S {
        let t2 = self.sqrt_q();
        S::one() / t2.clone() + t2
    }

    /// True iff `q < w^2 < 1`, i.e. `0 < u < lambda/2`.
    pub fn is_physical(&self) -> bool {
        let w2 = self.w2();
        self.q < w2 && w2 < S::one()
    }

    /// Self-dual anisotropy `x = x1 = 1/x2 = (w^2/q^{1/2})(1 - q/w^2)/(1 - w^2)`.
    pub fn x(&self) -> Result<S> {
        let w2 = self.check_poles()?;
        Ok(self.s() * (S::one() - self.q.clone() / w2.clone()) / (S::one() - w2))
    }

    fn check_poles(&self) -> Result<S> {
        let w2 = self.w2();
        if w2.near(&S::one(), POLE_TOLERANCE) {
            return Err(Error::Pole(Pole::WSquaredOne));
        }
        if w2.near(&self.q, POLE_TOLERANCE) {
            return Err(Error::Pole(Pole::WSquaredQ));
        }
        Ok(w2)
    }

    /// Horizontal and vertical couplings on the self-dual curve.
    pub fn couplings(&self) -> Result<CouplingParams<S>> {
        let w2 = self.check_poles()?;
        let q = self.q.clone();
        let one = S::one();
        let exp_k1 = (w2.clone() / q.clone()) * (one.clone() - q.clone() * q.clone() / w2.clone())
            / (one.clone() - w2.clone());
        let exp_k2 = (one.clone() / w2.clone()) * (one.clone() - q.clone() * w2.clone())
            / (one - q / w2);
        Ok(CouplingParams {
            potts_q: self.potts_q(),
            exp_k1,
            exp_k2,
            x: self.x()?,
        })
    }

    /// `xi(u) = e^{K2(u)} e^{K2(lambda-u)} + Q - 1`, evaluated in its product
    /// form `-Q sinh(2u) sinh(2 lambda - 2u) / sinh(lambda - 2u)^2` written
    /// in `(t, w)`.
    pub fn xi(&self) -> Result<S> {
        let w2 = self.w2();
        if w2.near(&self.q, POLE_TOLERANCE) {
            return Err(Error::Pole(Pole::WSquaredQ));
        }
        let w = self.w.clone();
        let q = self.q.clone();
        let t2 = self.sqrt_q();
        let a = S::one() / w.clone() - w.clone();
        let b = w.clone() / q.clone() - q / w.clone();
        let c = w.clone() / t2.clone() - t2 / w;
        Ok(-(self.potts_q() * a * b / (c.clone() * c)))
    }

    /// `Delta(u) = e^{K2} + Q - 1 = 2 cosh(lambda) sinh(2 lambda - 2u) / sinh(lambda - 2u)`.
    pub fn delta(&self) -> Result<S> {
        let w2 = self.w2();
        if w2.near(&self.q, POLE_TOLERANCE) {
            return Err(Error::Pole(Pole::WSquaredQ));
        }
        let w = self.w.clone();
        let q = self.q.clone();
        let t2 = self.sqrt_q();
        let b = w.clone() / q.clone() - q / w.clone();
        let c = w.clone() / t2.clone() - t2 / w;
        Ok(self.sqrt_potts_q() * b / c)
    }

    /// `u -> lambda - u`, i.e. `w -> q/w` (`s -> q/s`).
    pub fn inversion_image(&self) -> Self {
        SpectralParams {
            q: self.q.clone(),
            w: self.q.clone() / self.w.clone(),
            t: self.t.clone(),
        }
    }

    /// `u -> lambda/2 - u`, i.e. `w -> q^{1/2}/w` (`s -> 1/s`).
    pub fn rotation_image(&self) -> Self {
        SpectralParams {
            q: self.q.clone(),
            w: self.sqrt_q() / self.w.clone(),
            t: self.t.clone(),
        }
    }
}

impl<S: Real> SpectralParams<S> {
    /// `q = e^{-2 lambda}`, `w = e^{-2u}`; requires `lambda > 0`.
    pub fn from_lambda_u(lambda: S, u: S) -> Result<Self> {
        if lambda <= S::zero() {
            return domain("lambda must be positive (Q > 4 branch)");
        }
        let two = S::from_i64(2);
        let q = (-(two.clone() * lambda)).exp();
        let w = (-(two * u)).exp();
        Self::from_qw(q, w)
    }

    /// `lambda = -ln(q)/2`.
    pub fn lambda(&self) -> S {
        -self.q.ln() / S::from_i64(2)
    }

    /// `u = -ln(w)/2`.
    pub fn u(&self) -> S {
        -self.w.ln() / S::from_i64(2)
    }

    /// `u / lambda`.
    pub fn u_frac(&self) -> S {
        self.u() / self.lambda()
    }

    /// `xi` from its hyperbolic form; independent of [`SpectralParams::xi`].
    pub fn xi_hyperbolic(&self) -> Result<S> {
        let (lam, u) = (self.lambda(), self.u());
        let two = S::from_i64(2);
        let d = (lam.clone() - two.clone() * u.clone()).sinh();
        if d.abs().to_f64() < POLE_TOLERANCE {
            return Err(Error::Pole(Pole::WSquaredQ));
        }
        let num = (two.clone() * u.clone()).sinh() * (two.clone() * lam - two * u).sinh();
        Ok(-(self.potts_q() * num / (d.clone() * d)))
    }

    /// `Delta` from its hyperbolic form.
    pub fn delta_hyperbolic(&self) -> Result<S> {
        let (lam, u) = (self.lambda(), self.u());
        let two = S::from_i64(2);
        let d = (lam.clone() - two.clone() * u.clone()).sinh();
        if d.abs().to_f64() < POLE_TOLERANCE {
            return Err(Error::Pole(Pole::WSquaredQ));
        }
        Ok(two.clone() * lam.cosh() * (two.clone() * lam - two * u).sinh() / d)
    }

    /// `(e^{K1}, e^{K2})` from `sinh(2 lambda - 2u)/sinh(2u)` and
    /// `sinh(lambda + 2u)/sinh(lambda - 2u)`.
    pub fn exp_couplings_hyperbolic(&self) -> (S, S) {
        let (lam, u) = (self.lambda(), self.u());
        let two = S::from_i64(2);
        let k1 = (two.clone() * lam.clone() - two.clone() * u.clone()).sinh() / (two.clone() * u.clone()).sinh();
        let k2 = (lam.clone() + two.clone() * u.clone()).sinh() / (lam - two * u).sinh();
        (k1, k2)
    }
}

/// Couplings of the Potts model at a point of the self-dual curve.
///
/// Couplings are stored as Boltzmann factors `e^{K}` so that the type works
/// over exact fields; outside the physical strip `e^{K2}` may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingParams<S> {
    pub potts_q: S,
    pub exp_k1: S,
    pub exp_k2: S,
    pub x: S,
}

impl<S: Scalar> CouplingParams<S> {
    /// `v1 = e^{K1} - 1`.
    pub fn v1(&self) -> S {
        self.exp_k1.clone() - S::one()
    }

    /// `v2 = e^{K2} - 1`.
    pub fn v2(&self) -> S {
        self.exp_k2.clone() - S::one()
    }

    /// `Delta = e^{K2} + Q - 1`.
    pub fn delta(&self) -> S {
        self.exp_k2.clone() + self.potts_q.clone() - S::one()
    }

    /// Couplings at the inversion image, obtained algebraically:
    /// `e^{K1(lambda-u)} = e^{-K1(u)}`, `e^{K2(lambda-u)} = 2 - Q - e^{K2(u)}`.
    pub fn inverted(&self) -> Self {
        let exp_k1 = S::one() / self.exp_k1.clone();
        let exp_k2 = S::from_i64(2) - self.potts_q.clone() - self.exp_k2.clone();
        CouplingParams {
            potts_q: self.potts_q.clone(),
            exp_k1,
            exp_k2,
            x: -self.x.clone(),
        }
    }

    /// `xi = e^{K2(u)} e^{K2(lambda-u)} + Q - 1` from the couplings alone.
    pub fn xi(&self) -> S {
        self.exp_k2.clone() * self.inverted().exp_k2 + self.potts_q.clone() - S::one()
    }
}

impl<S: Real> CouplingParams<S> {
    pub fn k1(&self) -> S {
        self.exp_k1.ln()
    }

    pub fn k2(&self) -> S {
        self.exp_k2.ln()
    }
}

/// Duality map on Boltzmann factors, applied coupling by coupling:
/// `(e^{K} - 1)(e^{K*} - 1) = Q`. On the self-dual curve this exchanges the
/// two couplings, `K1* = K2`.
pub fn dual_exp_couplings<S: Scalar>(exp_k1: S, exp_k2: S, potts_q: S) -> Result<(S, S)> {
    let one = S::one();
    if exp_k1 <= one || exp_k2 <= one {
        return domain("duality requires K1 > 0 and K2 > 0");
    }
    let qm1 = potts_q - one.clone();
    let d1 = (exp_k1.clone() + qm1.clone()) / (exp_k1 - one.clone());
    let d2 = (exp_k2.clone() + qm1) / (exp_k2 - one);
    Ok((d1, d2))
}

/// Duality map on the couplings themselves.
pub fn dual_couplings<S: Real>(k1: S, k2: S, potts_q: S) -> Result<(S, S)> {
    if k1 <= S::zero() || k2 <= S::zero() {
        return domain("duality requires K1 > 0 and K2 > 0");
    }
    let (a, b) = dual_exp_couplings(k1.exp(), k2.exp(), potts_q)?;
    Ok((a.ln(), b.ln()))
}

/// Positive root `q < 1` of `q + 1/q = Q - 2`, for `Q > 4`.
pub fn q_from_potts_q<S: Real>(potts_q: S) -> Result<S> {
    let four = S::from_i64(4);
    if potts_q <= four.clone() {
        return domain("Q must exceed 4");
    }
    let b = potts_q.clone() - S::from_i64(2);
    let disc = (potts_q.clone() * (potts_q - four)).sqrt();
    Ok((b - disc) / S::from_i64(2))
}

/// Serializable `(q, s)` point used by the CLI and JSON records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QsPoint {
    pub q: f64,
    pub s: f64,
}

impl QsPoint {
    pub fn spectral(&self) -> Result<SpectralParams<f64>> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return domain(format!("--q {} is outside (0, 1)", self.q));
        }
        SpectralParams::from_ts(self.q.powf(0.25), self.s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn isotropic_quarter_point() {
        let sp = SpectralParams::from_qw(0.25, 0.5).unwrap();
        assert!(close(sp.lambda(), std::f64::consts::LN_2, 1e-15));
        assert!(close(sp.u(), std::f64::consts::LN_2 / 2.0, 1e-15));
        assert!(close(sp.s(), 0.5, 1e-15));
        let sp = SpectralParams::from_qw(0.25, 0.5f64.sqrt()).unwrap();
        assert!(close(sp.u(), std::f64::consts::LN_2 / 4.0, 1e-15));
        assert!(close(sp.s(), 1.0, 1e-15));
        assert!(close(*sp.t(), std::f64::consts::SQRT_2 / 2.0, 1e-15));
    }

    #[test]
    fn q_near_one_gives_q_states_near_four() {
        let sp = SpectralParams::from_qw(1.0 - 1e-9, 0.9).unwrap();
        assert!((sp.potts_q() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn q_for_five_states() {
        // oracle: quadratic formula q^2 - (Q-2) q + 1 = 0
        let oracle = (3.0 - 5f64.sqrt()) / 2.0;
        assert!(close(oracle, 0.3819660113, 1e-10));
        let q = q_from_potts_q(5.0).unwrap();
        assert!(close(q, oracle, 1e-15));
        let sp = SpectralParams::from_ts(q.powf(0.25), 1.0).unwrap();
        assert!((sp.potts_q() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_domain() {
        assert!(SpectralParams::from_qw(1.5, 0.5).is_err());
        assert!(SpectralParams::from_qw(0.0, 0.5).is_err());
        assert!(SpectralParams::from_qw(0.2, 0.0).is_err());
    }

    #[test]
    fn couplings_at_special_points() {
        // w^2 = q: K1 = 0 but K2 has its pole
        let sp = SpectralParams::from_ts(0.5f64, 0.25).unwrap();
        assert!(matches!(sp.couplings(), Err(Error::Pole(Pole::WSquaredQ))));
        let sp = SpectralParams::from_qw(0.2f64, 1.0).unwrap();
        assert!(matches!(sp.couplings(), Err(Error::Pole(Pole::WSquaredOne))));
        let sp = SpectralParams::from_ts(0.2f64.powf(0.25), 1.0).unwrap();
        let c = sp.couplings().unwrap();
        assert!(close(c.exp_k1, c.exp_k2, 1e-13));
    }

    #[test]
    fn k1_vanishes_on_approach_to_w2_eq_q() {
        let q = 0.2f64;
        let sp = SpectralParams::from_qw(q, q.sqrt() * (1.0 + 1e-7)).unwrap();
        assert!(sp.couplings().unwrap().k1().abs() < 1e-5);
    }

    #[test]
    fn couplings_two_routes() {
        let sp = SpectralParams::from_qw(0.2f64, 0.6).unwrap();
        let c = sp.couplings().unwrap();
        let (h1, h2) = sp.exp_couplings_hyperbolic();
        assert!(close(c.exp_k1, h1, 1e-12));
        assert!(close(c.exp_k2, h2, 1e-12));
        // e^{K1} = 1 + Q^{1/2} x, e^{K2} = 1 + Q^{1/2}/x
        let rq = sp.potts_q().sqrt();
        assert!(close(c.exp_k1, 1.0 + rq * c.x, 1e-12));
        assert!(close(c.exp_k2, 1.0 + rq / c.x, 1e-12));
    }

    #[test]
    fn duality_exchanges_self_dual_couplings() {
        let sp = SpectralParams::from_qw(0.2f64, 0.6).unwrap();
        let c = sp.couplings().unwrap();
        let (d1, d2) = dual_exp_couplings(c.exp_k1, c.exp_k2, c.potts_q).unwrap();
        assert!(close(d1, c.exp_k2, 1e-12));
        assert!(close(d2, c.exp_k1, 1e-12));
    }

    #[test]
    fn duality_is_an_involution() {
        let (a, b) = dual_couplings(1.0f64, 1.0, 5.0).unwrap();
        let (c, d) = dual_couplings(a, b, 5.0).unwrap();
        assert!(close(c, 1.0, 1e-13) && close(d, 1.0, 1e-13));
        let (k1s, _) = dual_couplings(40.0f64, 1.0, 5.0).unwrap();
        assert!(k1s < 1e-15);
        assert!(dual_couplings(-0.1f64, 1.0, 5.0).is_err());
    }

    #[test]
    fn xi_two_routes_and_symmetry() {
        let lam = -(0.2f64).ln() / 2.0;
        let sp = SpectralParams::from_lambda_u(lam, lam / 4.0).unwrap();
        let xi = sp.xi().unwrap();
        assert!(close(xi, sp.xi_hyperbolic().unwrap(), 1e-12));
        assert!(close(xi, sp.couplings().unwrap().xi(), 1e-12));
        assert!(xi < 0.0);
        assert!(close(xi, sp.inversion_image().xi().unwrap(), 1e-12));
        let near0 = SpectralParams::from_lambda_u(lam, 1e-9).unwrap();
        let v = near0.xi().unwrap();
        assert!(v < 0.0 && v > -1e-6);
    }

    #[test]
    fn delta_two_routes() {
        let lam = -(0.3f64).ln() / 2.0;
        let sp = SpectralParams::from_lambda_u(lam, 0.1 * lam).unwrap();
        let c = sp.couplings().unwrap();
        assert!(close(sp.delta().unwrap(), c.delta(), 1e-12));
        assert!(close(sp.delta().unwrap(), sp.delta_hyperbolic().unwrap(), 1e-12));
        // w = 1: e^{K2} = 1, Delta = Q
        let sp = SpectralParams::from_qw(0.3f64, 1.0).unwrap();
        assert!(close(sp.delta().unwrap(), sp.potts_q(), 1e-13));
        assert!(close(sp.delta_hyperbolic().unwrap(), sp.potts_q(), 1e-13));
    }

    #[test]
    fn images_are_involutions() {
        let lam = -(0.2f64).ln() / 2.0;
        let sp = SpectralParams::from_lambda_u(lam, 0.1 * lam).unwrap();
        let inv = sp.inversion_image();
        assert!(close(inv.u(), 0.9 * lam, 1e-13));
        assert!(close(inv.w2(), sp.q() * sp.q() / sp.w2(), 1e-13));
        let back = inv.inversion_image();
        assert!(close(*back.w(), *sp.w(), 1e-15));
        let rot = sp.rotation_image();
        assert!(close(rot.s(), 1.0 / sp.s(), 1e-13));
        assert!(close(*rot.rotation_image().w(), *sp.w(), 1e-15));
        let iso = SpectralParams::from_ts(0.6f64, 1.0).unwrap();
        assert!(close(*iso.rotation_image().w(), *iso.w(), 1e-15));
    }

    #[test]
    fn rotation_swaps_couplings_and_inversion_inverts_k1_exactly() {
        let t = BigRational::from_ratio(1, 2);
        let s = BigRational::from_ratio(9, 4);
        let sp = SpectralParams::from_ts(t, s).unwrap();
        let c = sp.couplings().unwrap();
        let r = sp.rotation_image().couplings().unwrap();
        assert_eq!(c.exp_k1, r.exp_k2);
        assert_eq!(c.exp_k2, r.exp_k1);
        let i = sp.inversion_image().couplings().unwrap();
        assert_eq!(c.exp_k1.clone() * i.exp_k1.clone(), BigRational::from_i64(1));
        assert_eq!(i.exp_k2, c.inverted().exp_k2);
        assert_eq!(sp.xi().unwrap(), c.xi());
        assert_eq!(sp.xi().unwrap(), sp.inversion_image().xi().unwrap());
    }

    #[test]
    fn round_trip_through_lambda_u() {
        let sp = SpectralParams::from_qw(0.37f64, 0.71).unwrap();
        let back = SpectralParams::from_lambda_u(sp.lambda(), sp.u()).unwrap();
        assert!(close(*back.q(), 0.37, 1e-15) && close(*back.w(), 0.71, 1e-15));
    }
}
