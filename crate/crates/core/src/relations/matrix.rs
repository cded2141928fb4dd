//! Inversion of the Potts row transfer matrices on `Q^N` spin rows, built
//! densely over any [`Scalar`] ring.
//!
//! The image couplings at `lambda - u` come from [`CouplingParams::inverted`]:
//! `e^{K1} -> e^{-K1}`, `e^{K2} -> 2 - Q - e^{K2}`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use super::{IdentityReport, PointDefect};
use crate::error::{Error, Result};
use crate::params::{CouplingParams, SpectralParams};
use crate::scalar::Scalar;

/// Largest `Q^N` handled by the dense products.
pub const MATRIX_DIM_LIMIT: usize = 729;
/// Tolerance for the eigenvalue corollary.
pub const EIGEN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
struct Dense<S> {
    dim: usize,
    a: Vec<S>,
}

impl<S: Scalar> Dense<S> {
    fn from_fn(dim: usize, f: impl Fn(usize, usize) -> S + Sync) -> Self {
        let a = (0..dim * dim).into_par_iter().map(|k| f(k / dim, k % dim)).collect();
        Dense { dim, a }
    }

    fn get(&self, i: usize, j: usize) -> &S {
        &self.a[i * self.dim + j]
    }

    fn mul(&self, o: &Self) -> Self {
        let d = self.dim;
        let a = (0..d)
            .into_par_iter()
            .flat_map_iter(|i| {
                (0..d).map(move |j| {
                    (0..d).fold(S::zero(), |acc, k| {
                        let x = self.get(i, k);
                        if x.is_zero() {
                            acc
                        } else {
                            acc + x.clone() * o.get(k, j).clone()
                        }
                    })
                })
            })
            .collect();
        Dense { dim: d, a }
    }

    fn neg(&self) -> Self {
        Dense { dim: self.dim, a: self.a.iter().map(|x| -x.clone()).collect() }
    }

    /// `max |A - c 1| / |c|`; exact rings report zero only for an exact match.
    fn defect_from_identity(&self, c: &S) -> f64 {
        let scale = c.abs().to_f64();
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let target = if i == j { c.clone() } else { S::zero() };
                let diff = self.get(i, j).clone() - target;
                if diff.is_zero() {
                    continue;
                }
                let d = (diff.abs().to_f64() / scale).max(if S::EXACT { f64::MIN_POSITIVE } else { 0.0 });
                worst = if d.is_nan() { f64::NAN } else { worst.max(d) };
            }
        }
        worst
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j).to_f64())
    }
}

struct Rows {
    q: usize,
    n: usize,
    dim: usize,
}

impl Rows {
    fn new(n: usize, q: u32) -> Result<Self> {
        if n == 0 || q < 2 {
            return Err(Error::Domain("need N >= 1 and Q >= 2".into()));
        }
        let dim = (q as usize).checked_pow(n as u32).filter(|&d| d <= MATRIX_DIM_LIMIT);
        match dim {
            Some(dim) => Ok(Rows { q: q as usize, n, dim }),
            None => Err(Error::SizeGuard(format!("{q}^{n} spin rows (limit {MATRIX_DIM_LIMIT})"))),
        }
    }

    fn digit(&self, idx: usize, site: usize) -> usize {
        idx / self.q.pow(site as u32) % self.q
    }

    fn equal_sites(&self, a: usize, b: usize) -> usize {
        (0..self.n).filter(|&j| self.digit(a, j) == self.digit(b, j)).count()
    }

    /// `prod_j (d if sigma_j = sigma'_j else o)`.
    fn site_product<S: Scalar>(&self, d: &S, o: &S) -> Dense<S> {
        let dp: Vec<S> = (0..=self.n).map(|k| d.powi(k as i32)).collect();
        let op: Vec<S> = (0..=self.n).map(|k| o.powi(k as i32)).collect();
        Dense::from_fn(self.dim, |i, j| {
            let e = self.equal_sites(i, j);
            dp[e].clone() * op[self.n - e].clone()
        })
    }

    fn t1<S: Scalar>(&self, exp_k1: &S) -> Dense<S> {
        Dense::from_fn(self.dim, |i, j| {
            if i != j {
                return S::zero();
            }
            let bonds = (0..self.n - 1).filter(|&k| self.digit(i, k) == self.digit(i, k + 1)).count();
            exp_k1.powi(bonds as i32)
        })
    }

    fn t2<S: Scalar>(&self, exp_k2: &S) -> Dense<S> {
        self.site_product(exp_k2, &S::one())
    }

    /// `T2^{1/2}` as `(negative, R)`. The site matrix has eigenvalues
    /// `e^{K2} - 1` and `Delta`; when both are negative the true root is
    /// `i^N R`.
    fn sqrt_t2<S: Scalar>(&self, exp_k2: &S, potts_q: &S) -> Result<(bool, Dense<S>)> {
        let small = exp_k2.clone() - S::one();
        let delta = exp_k2.clone() + potts_q.clone() - S::one();
        let zero = S::zero();
        let negative = if small >= zero && delta >= zero {
            false
        } else if small <= zero && delta <= zero {
            true
        } else {
            return Err(Error::Domain(format!(
                "site matrix with e^K2 = {} has eigenvalues of both signs",
                exp_k2.to_f64()
            )));
        };
        let root = |x: S| {
            let x = if negative { -x } else { x };
            x.sqrt_checked().ok_or_else(|| {
                Error::Domain(format!("no square root of {} in the {} ring", x.to_f64(), S::NAME))
            })
        };
        let a = root(small)?;
        let b = (root(delta)? - a.clone()) / potts_q.clone();
        Ok((negative, self.site_product(&(a + b.clone()), &b)))
    }

    /// `V = T2^{1/2} T1 T2^{1/2}`.
    fn v<S: Scalar>(&self, c: &CouplingParams<S>) -> Result<Dense<S>> {
        let (negative, r) = self.sqrt_t2(&c.exp_k2, &c.potts_q)?;
        let v = r.mul(&self.t1(&c.exp_k1)).mul(&r);
        Ok(if negative && self.n % 2 == 1 { v.neg() } else { v })
    }
}

fn check_potts_q<S: Scalar>(q: u32, c: &CouplingParams<S>) -> Result<()> {
    if c.potts_q != S::from_i64(q as i64) {
        return Err(Error::Domain(format!("couplings carry Q = {}, not {q}", c.potts_q.to_f64())));
    }
    if c.exp_k1.is_zero() {
        return Err(Error::Domain("e^K1 = 0 has no inverse".into()));
    }
    Ok(())
}

fn label<S: Scalar>(q: u32, n: usize, c: &CouplingParams<S>) -> String {
    format!("Q={q},N={n},e^K1={},e^K2={}", c.exp_k1.to_f64(), c.exp_k2.to_f64())
}

fn tolerance<S: Scalar>() -> f64 {
    if S::EXACT {
        0.0
    } else {
        super::FLOAT_TOLERANCE
    }
}

/// Couplings of the spectral point with the matrix size `Q` set to an
/// integer. On the self-dual curve `Q = q + 2 + 1/q`; any other integer
/// gives a Potts model with the same couplings, for which the relations
/// still hold with the image couplings taken from the inversion map.
pub fn with_potts_q<S: Scalar>(sp: &SpectralParams<S>, q: u32) -> Result<CouplingParams<S>> {
    let mut c = sp.couplings()?;
    c.potts_q = S::from_i64(q as i64);
    Ok(c)
}

/// `T1(u) T1(lambda-u) = 1` and `T2(u) T2(lambda-u) = xi^N 1`.
pub fn verify_matrix_inversion<S: Scalar>(n: usize, q: u32, c: &CouplingParams<S>) -> Result<Vec<IdentityReport>> {
    check_potts_q(q, c)?;
    let rows = Rows::new(n, q)?;
    let image = c.inverted();
    let point = label(q, n, c);
    let t1 = rows.t1(&c.exp_k1).mul(&rows.t1(&image.exp_k1)).defect_from_identity(&S::one());
    let xi_n = c.xi().powi(n as i32);
    if xi_n.is_zero() {
        return Err(Error::Domain("xi = 0".into()));
    }
    let t2 = rows.t2(&c.exp_k2).mul(&rows.t2(&image.exp_k2)).defect_from_identity(&xi_n);
    Ok(vec![
        IdentityReport::new("T1(u)T1(lambda-u)=1", S::NAME, tolerance::<S>(), vec![PointDefect { point: point.clone(), defect: t1 }]),
        IdentityReport::new("T2(u)T2(lambda-u)=xi^N", S::NAME, tolerance::<S>(), vec![PointDefect { point, defect: t2 }]),
    ])
}

/// `V(u) V(lambda-u) = xi^N 1`.
pub fn verify_vv<S: Scalar>(n: usize, q: u32, c: &CouplingParams<S>) -> Result<IdentityReport> {
    check_potts_q(q, c)?;
    let rows = Rows::new(n, q)?;
    let xi_n = c.xi().powi(n as i32);
    let defect = rows.v(c)?.mul(&rows.v(&c.inverted())?).defect_from_identity(&xi_n);
    Ok(IdentityReport::new("V(u)V(lambda-u)=xi^N", S::NAME, tolerance::<S>(), vec![PointDefect { point: label(q, n, c), defect }]))
}

/// `Lambda(u)^2 Lambda(lambda-u)^2 = xi^N`, with `Lambda(lambda-u)^2` read
/// off by applying `V(lambda-u)` to the maximal eigenvector of `V(u)`.
/// The defect also includes how far that vector is from being an
/// eigenvector of `V(lambda-u)`.
pub fn verify_eigenvalue_inversion(n: usize, q: u32, c: &CouplingParams<f64>) -> Result<IdentityReport> {
    check_potts_q(q, c)?;
    let rows = Rows::new(n, q)?;
    let v = rows.v(c)?.to_nalgebra();
    let v_image = rows.v(&c.inverted())?.to_nalgebra();
    let eig = SymmetricEigen::new(v);
    let k = eig.eigenvalues.imax();
    let lam2 = eig.eigenvalues[k];
    let psi: DVector<f64> = eig.eigenvectors.column(k).into_owned();
    let image_psi = &v_image * &psi;
    let mu = psi.dot(&image_psi);
    let residual = (&image_psi - &psi * mu).norm() / mu.abs();
    let xi_n = c.xi().powi(n as i32);
    let defect = (lam2 * mu / xi_n - 1.0).abs().max(residual);
    let note = format!(
        "Lambda(u)^2 = {lam2:.15e}, Lambda(lambda-u)^2 = {mu:.15e}, xi^N = {xi_n:.15e} (sign {})",
        if xi_n < 0.0 { "-" } else { "+" }
    );
    Ok(IdentityReport::new(
        "Lambda(u)^2 Lambda(lambda-u)^2=xi^N",
        "f64",
        EIGEN_TOLERANCE,
        vec![PointDefect { point: label(q, n, c), defect }],
    )
    .with_note(note))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Pole;
    use num_rational::BigRational;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn exact(q: i64, e1: BigRational, e2: BigRational) -> CouplingParams<BigRational> {
        CouplingParams { potts_q: r(q, 1), exp_k1: e1, exp_k2: e2, x: r(1, 1) }
    }

    fn float_point(q: f64, frac: f64) -> SpectralParams<f64> {
        let lambda = -q.ln() / 2.0;
        SpectralParams::from_lambda_u(lambda, frac * lambda).unwrap()
    }

    #[test]
    fn exact_products_at_rational_couplings() {
        // Q = 3, e^K2 = 2: site eigenvalues 1, 4 and, at the image, -4, -1.
        // Q = 2, e^K2 = 65/16: 49/16, 81/16 and -81/16, -49/16.
        let cases = [(3, 3, exact(3, r(3, 2), r(2, 1))), (2, 2, exact(2, r(5, 7), r(65, 16))), (2, 3, exact(2, r(5, 7), r(65, 16)))];
        for (q, n, c) in cases {
            for rep in verify_matrix_inversion(n, q as u32, &c).unwrap() {
                assert!(rep.pass && rep.max_defect == 0.0, "{rep:?}");
            }
            let rep = verify_vv(n, q as u32, &c).unwrap();
            assert!(rep.pass && rep.max_defect == 0.0, "{rep:?}");
            assert_eq!(rep.ring, "rational");
        }
    }

    #[test]
    fn exact_defect_detects_a_wrong_image() {
        let rows = Rows::new(2, 3).unwrap();
        let c = exact(3, r(3, 2), r(2, 1));
        let off = rows.t2(&c.exp_k2).mul(&rows.t2(&r(-2, 1)));
        assert!(off.defect_from_identity(&c.xi().powi(2)) > 0.0);
    }

    #[test]
    fn roots_must_exist_in_the_ring() {
        let c = exact(3, r(3, 2), r(3, 1));
        assert!(matches!(verify_vv(2, 3, &c), Err(Error::Domain(_))));
        assert!(verify_matrix_inversion(2, 3, &c).unwrap().iter().all(|r| r.pass));
    }

    #[test]
    fn float_products() {
        let c = with_potts_q(&float_point(0.2, 0.3), 3).unwrap();
        for rep in verify_matrix_inversion(3, 3, &c).unwrap() {
            assert!(rep.pass, "{rep:?}");
        }
        let rep = verify_vv(3, 3, &c).unwrap();
        assert!(rep.max_defect <= 1e-11, "{rep:?}");
    }

    #[test]
    fn pole_guard() {
        let q: f64 = 0.2;
        let lambda = -q.ln() / 2.0;
        let sp = SpectralParams::from_lambda_u(lambda, lambda / 2.0).unwrap();
        assert!(matches!(with_potts_q(&sp, 3), Err(Error::Pole(Pole::WSquaredQ))));
        assert!(matches!(Rows::new(7, 3), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn eigenvalue_corollary_and_sign() {
        for n in [2, 3] {
            let c = with_potts_q(&float_point(0.2, 0.3), 3).unwrap();
            let rep = verify_eigenvalue_inversion(n, 3, &c).unwrap();
            assert!(rep.pass, "{rep:?}");
            assert!(c.xi() < 0.0);
            let sign = if n % 2 == 0 { "+" } else { "-" };
            assert!(rep.note.as_ref().unwrap().ends_with(&format!("(sign {sign})")));
        }
    }

    #[test]
    fn spectral_image_is_the_inversion_map_on_the_curve() {
        // Q = 5 lies on the curve at q = (3 - sqrt 5)/2.
        let q = (3.0 - 5f64.sqrt()) / 2.0;
        let sp = float_point(q, 0.2);
        let c = with_potts_q(&sp, 5).unwrap();
        assert!((c.potts_q - sp.potts_q()).abs() < 1e-12);
        let img = sp.inversion_image().couplings().unwrap();
        let inv = c.inverted();
        assert!((img.exp_k1 - inv.exp_k1).abs() < 1e-12 * inv.exp_k1.abs());
        assert!((img.exp_k2 - inv.exp_k2).abs() < 1e-12 * inv.exp_k2.abs());
        assert!(verify_vv(3, 5, &c).unwrap().pass);
        assert!(verify_eigenvalue_inversion(2, 5, &c).unwrap().pass);
    }
}
