//! Exact checks of the functional relations on series bundles.
//!
//! Rotation `u -> lambda/2 - u` is `s -> 1/s` and is checked directly on
//! the `(t, s)` series. Inversion `u -> lambda - u` sends `W = s t^2` to
//! `q^2/W`, which a power series in `t` cannot absorb, so the regular parts
//! `log F`, `log G` are rewritten as Laurent series in `W` whose
//! coefficients are series in `t`. The relations then become coefficient
//! identities, and the rational prefactors are checked separately at exact
//! points.

use num_rational::BigRational;
use num_traits::One;

use super::{IdentityReport, PointDefect};
use crate::bundle::{CornerSeries, SeriesBundle};
use crate::closedform::series::{corner, log_one_plus_q, minus_k_sum_plus_log_q};
use crate::error::Result;
use crate::lattice::lattice_bundle;
use crate::params::SpectralParams;
use crate::qseries::TruncatedSeries;
use crate::scalar::Scalar;

/// `c0 + sum_n (pos[n-1] W^n + neg[n-1] W^{-n})` with `t`-series coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct WLaurent {
    pub c0: TruncatedSeries,
    pub pos: Vec<TruncatedSeries>,
    pub neg: Vec<TruncatedSeries>,
}

impl WLaurent {
    pub fn zero(nmax: usize, order: i32) -> Self {
        WLaurent {
            c0: TruncatedSeries::zero(order),
            pos: vec![TruncatedSeries::zero(order); nmax],
            neg: vec![TruncatedSeries::zero(order); nmax],
        }
    }

    pub fn nmax(&self) -> usize {
        self.pos.len()
    }

    /// Regroups `sum c s^k t^d` by powers of `W`: `s^k t^d = W^k t^{d-2k}`.
    /// Powers with `|k| > nmax` are dropped.
    pub fn from_series(f: &TruncatedSeries, nmax: usize) -> Self {
        let order = f.order();
        let mut out = WLaurent {
            c0: TruncatedSeries::zero(order),
            pos: (1..=nmax as i32).map(|n| TruncatedSeries::zero(order - 2 * n)).collect(),
            neg: (1..=nmax as i32).map(|n| TruncatedSeries::zero(order + 2 * n)).collect(),
        };
        for (d, p) in f.terms() {
            for (k, c) in p.terms() {
                let n = k.unsigned_abs() as usize;
                if n > nmax {
                    continue;
                }
                let slot = match k.signum() {
                    0 => &mut out.c0,
                    1 => &mut out.pos[n - 1],
                    _ => &mut out.neg[n - 1],
                };
                let m = TruncatedSeries::monomial(c.clone(), 0, d - 2 * k, slot.order());
                *slot = &*slot + &m;
            }
        }
        out
    }

    /// `log(1 - q^a W^{±1}) = -sum_n q^{a n} W^{±n} / n`.
    pub fn log_one_minus(a: i32, inverse_w: bool, nmax: usize, order: i32) -> Self {
        let mut out = WLaurent::zero(nmax, order);
        for n in 1..=nmax {
            let m = TruncatedSeries::monomial(r(-1, n as i64), 0, 4 * a * n as i32, order);
            if inverse_w {
                out.neg[n - 1] = m;
            } else {
                out.pos[n - 1] = m;
            }
        }
        out
    }

    pub fn constant(c: TruncatedSeries, nmax: usize) -> Self {
        let order = c.order();
        WLaurent { c0: c, ..WLaurent::zero(nmax, order) }
    }

    /// The substitution `W -> q^a W^{±1}`: `W^n -> q^{an} W^{±n}`, `W^{-n} -> q^{-an} W^{∓n}`.
    pub fn substitute(&self, a: i32, inverse_w: bool) -> Self {
        let shift = |v: &[TruncatedSeries], sign: i32| -> Vec<TruncatedSeries> {
            v.iter().enumerate().map(|(i, c)| c.shift_t(sign * 4 * a * (i as i32 + 1))).collect()
        };
        let (pos, neg) = (shift(&self.pos, 1), shift(&self.neg, -1));
        if inverse_w {
            WLaurent { c0: self.c0.clone(), pos: neg, neg: pos }
        } else {
            WLaurent { c0: self.c0.clone(), pos, neg }
        }
    }

    fn zip(&self, o: &Self, f: impl Fn(&TruncatedSeries, &TruncatedSeries) -> TruncatedSeries) -> Self {
        let n = self.nmax().min(o.nmax());
        WLaurent {
            c0: f(&self.c0, &o.c0),
            pos: (0..n).map(|i| f(&self.pos[i], &o.pos[i])).collect(),
            neg: (0..n).map(|i| f(&self.neg[i], &o.neg[i])).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a - b)
    }

    /// Pairs `(power of W, coefficient)` from `W^{-nmax}` to `W^{nmax}`.
    pub fn coefficients(&self) -> Vec<(i32, &TruncatedSeries)> {
        let mut v: Vec<(i32, &TruncatedSeries)> =
            self.neg.iter().enumerate().rev().map(|(i, c)| (-(i as i32) - 1, c)).collect();
        v.push((0, &self.c0));
        v.extend(self.pos.iter().enumerate().map(|(i, c)| (i as i32 + 1, c)));
        v
    }
}

/// One report point per power of `W` whose coefficient is known through a
/// nonnegative order. The defect is 0 for an exact match and 1 otherwise.
fn compare(lhs: &WLaurent, rhs: &WLaurent) -> (Vec<PointDefect>, Option<String>) {
    let mut points = Vec::new();
    let mut note = None;
    for ((n, a), (_, b)) in lhs.coefficients().into_iter().zip(rhs.coefficients()) {
        let order = a.order().min(b.order());
        if order < 0 {
            continue;
        }
        let diff = a.first_difference(b);
        if let (Some(d), None) = (diff, &note) {
            note = Some(format!("first mismatch at W^{n} t^{d}"));
        }
        points.push(PointDefect { point: format!("W^{n} through t^{order}"), defect: if diff.is_some() { 1.0 } else { 0.0 } });
    }
    (points, note)
}

fn report(id: &str, points: Vec<PointDefect>, note: Option<String>) -> IdentityReport {
    let r = IdentityReport::new(id, "series", 0.0, points);
    match note {
        Some(n) => r.with_note(n),
        None => r,
    }
}

fn exact_defect(a: &BigRational, b: &BigRational) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).to_f64().abs().max(f64::MIN_POSITIVE)
    }
}

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Rational `(t, s)` with `s t^2` a perfect square, inside the physical strip.
fn exact_points() -> Vec<(BigRational, BigRational)> {
    vec![(r(1, 2), r(9, 4)), (r(1, 3), r(4, 1)), (r(1, 5), r(9, 4)), (r(1, 3), r(1, 1))]
}

fn rational_prefactors() -> Result<(Vec<PointDefect>, Vec<PointDefect>)> {
    let mut bulk = Vec::new();
    let mut delta = Vec::new();
    for (t, s) in exact_points() {
        let sp = SpectralParams::from_ts(t.clone(), s.clone())?;
        let img = sp.inversion_image();
        let (q, w) = (sp.q().clone(), sp.w2());
        let one = BigRational::one();
        let (c, ci) = (sp.couplings()?, img.couplings()?);
        let factors = (&one - &w) * (&one - &q * &q / &w) / ((&one - &q * &w) * (&one - &q * &q * &q / &w));
        let rhs = c.exp_k1 * ci.exp_k1 * c.exp_k2 * ci.exp_k2 * (&one + &q) * (&one + &q) * factors;
        let label = format!("t={t},s={s}");
        bulk.push(PointDefect { point: format!("{label} prefactor"), defect: exact_defect(&rhs, &sp.xi()?) });
        let ratio = img.delta()? / sp.delta()?;
        let expect = (&one - &w) * (&one - &q / &w) / ((&one - &w / &q) * (&one - &q * &q / &w));
        delta.push(PointDefect { point: format!("{label} prefactor"), defect: exact_defect(&ratio, &expect) });
    }
    Ok((bulk, delta))
}

/// Largest `n` for which the coefficient of `W^{±n}` survives the
/// substitution `W -> q^2/W` at `t`-order `order`.
fn default_nmax(order: i32) -> usize {
    (order / 6).max(1) as usize
}

/// The eight relations on a series bundle: four inversion relations
/// through `log F`, `log G` and the corner series, four rotation relations
/// as the substitution `s -> 1/s`.
pub fn verify_series(b: &SeriesBundle) -> Result<Vec<IdentityReport>> {
    let order = b.order();
    let nmax = default_nmax(order);
    let lw = |a, inv| WLaurent::log_one_minus(a, inv, nmax, order + 8 * nmax as i32);
    let from = |f: &TruncatedSeries| WLaurent::from_series(&f.truncate(order), nmax);
    let (bulk_pre, delta_pre) = rational_prefactors()?;
    let mut out = Vec::new();

    // log F = -K1 - K2 + log Q - (f_b + log Q)
    let log_f = from(&minus_k_sum_plus_log_q(order)?).sub(&from(&b.f_b_reduced));
    let lhs = log_f.add(&log_f.substitute(2, true));
    let l = log_one_plus_q(order)?;
    let rhs = WLaurent::constant(&l + &l, nmax).add(&lw(0, false)).add(&lw(2, true)).sub(&lw(1, false)).sub(&lw(3, true));
    let (mut pts, note) = compare(&lhs, &rhs);
    pts.extend(bulk_pre);
    out.push(report("inversion: -f_b(u)-f_b(lambda-u)=log xi", pts, note));

    // log G = log(1 - q^2/W) - log(1 - W) - f_s
    let log_g = lw(2, true).sub(&lw(0, false)).sub(&from(&b.f_s));
    let lhs = log_g.add(&log_g.substitute(2, true));
    let (pts, note) = compare(&lhs, &WLaurent::zero(nmax, order));
    out.push(report("inversion: f_s(u)+f_s(lambda-u)=0", pts, note));

    // H(W) = log G(q/W) = -f'_s - log(1 - q/W) + log(1 - qW)
    let h = lw(1, false).sub(&lw(1, true)).sub(&from(&b.f_s_h));
    let lhs = h.sub(&h.substitute(2, true));
    let rhs = lw(0, false).add(&lw(1, false)).sub(&lw(2, true)).sub(&lw(3, true));
    let (mut pts, note) = compare(&lhs, &rhs);
    pts.extend(delta_pre);
    out.push(report("inversion: -f'_s(u)+f'_s(lambda-u)=log Delta(lambda-u)/Delta(u)", pts, note));

    let fc = match &b.f_c {
        CornerSeries::Known(s) => s,
        CornerSeries::UndeterminedConstant { rest } => rest,
    };
    let fcw = from(fc);
    let (pts, note) = compare(&fcw.sub(&fcw.substitute(2, true)), &WLaurent::zero(nmax, order));
    out.push(report("inversion: f_c(u)=f_c(lambda-u)", pts, note));

    let rot = |id: &str, a: &TruncatedSeries, image: &TruncatedSeries| {
        let diff = a.invert_s().first_difference(image);
        let pts = vec![PointDefect { point: format!("through t^{}", a.order().min(image.order())), defect: if diff.is_some() { 1.0 } else { 0.0 } }];
        report(id, pts, diff.map(|d| format!("first mismatch at t^{d}")))
    };
    out.push(rot("rotation: f_b(u)=f_b(lambda/2-u)", &b.f_b_reduced, &b.f_b_reduced));
    out.push(rot("rotation: f_s(u)=f'_s(lambda/2-u)", &b.f_s, &b.f_s_h));
    out.push(rot("rotation: f'_s(u)=f_s(lambda/2-u)", &b.f_s_h, &b.f_s));
    out.push(rot("rotation: f_c(u)=f_c(lambda/2-u)", fc, fc));
    Ok(out)
}

/// Corner series of a bundle: every coefficient free of `s` and equal to
/// the closed form. One point per degree through the bundle order.
pub fn fc_report(b: &SeriesBundle) -> Result<IdentityReport> {
    let fc = b.f_c.known().ok_or_else(|| crate::error::Error::Series("corner constant undetermined".into()))?;
    let expect = corner(fc.order())?;
    let points = (0..=fc.order())
        .map(|d| {
            let c = fc.coeff(d);
            let s_free = c.is_zero() || (c.min_exp() == Some(0) && c.max_exp() == Some(0));
            let ok = s_free && c == expect.coeff(d);
            PointDefect { point: format!("t^{d}"), defect: if ok { 0.0 } else { 1.0 } }
        })
        .collect();
    Ok(report("f_c independent of s", points, None))
}

/// Extracts the lattice series to order `t^order` and checks its corner
/// free energy.
pub fn verify_fc_constant(order: i32) -> Result<IdentityReport> {
    fc_report(&lattice_bundle(order)?)
}
