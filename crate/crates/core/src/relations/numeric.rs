//! The eight relations evaluated from the closed forms at numeric points.
//!
//! The image `lambda - u` lies outside the physical strip, where `e^{K2}`,
//! `xi` and `Delta(lambda - u)` are negative. Inversion relations are
//! therefore tested multiplicatively on `e^{-f}`, built from the regular
//! parts `F`, `G` whose sums still converge there.

use rayon::prelude::*;

use super::{GridPoint, IdentityReport, PointDefect, FLOAT_TOLERANCE};
use crate::closedform::numeric as cf;
use crate::error::Result;
use crate::params::SpectralParams;
use crate::scalar::Real;

pub const IDS: [&str; 8] = [
    "inversion: -f_b(u)-f_b(lambda-u)=log xi",
    "inversion: f_s(u)+f_s(lambda-u)=0",
    "inversion: -f'_s(u)+f'_s(lambda-u)=log Delta(lambda-u)/Delta(u)",
    "inversion: f_c(u)=f_c(lambda-u)",
    "rotation: f_b(u)=f_b(lambda/2-u)",
    "rotation: f_s(u)=f'_s(lambda/2-u)",
    "rotation: f'_s(u)=f_s(lambda/2-u)",
    "rotation: f_c(u)=f_c(lambda/2-u)",
];

fn ratio_defect<S: Real>(x: S) -> f64 {
    (x - S::one()).abs().to_f64()
}

fn rel_defect<S: Real>(a: S, b: S) -> f64 {
    let scale = a.abs().to_f64().max(b.abs().to_f64());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs().to_f64() / scale
    }
}

/// Defects of the eight relations at one point, in the order of [`IDS`].
pub fn defects_at<S: Real>(sp: &SpectralParams<S>) -> Result<[f64; 8]> {
    let img = sp.inversion_image();
    let rot = sp.rotation_image();
    let q = sp.q();

    let fb = cf::bulk_exp_minus(sp)? * cf::bulk_exp_minus(&img)? / sp.xi()?;
    let fs = cf::surface_exp_minus(sp)? * cf::surface_exp_minus(&img)?;
    let fsh = cf::surface_h_exp_minus(sp)? / cf::surface_h_exp_minus(&img)? * sp.delta()? / img.delta()?;
    let fc_inv = rel_defect(cf::corner(q)?, cf::corner(img.q())?);

    Ok([
        ratio_defect(fb),
        ratio_defect(fs),
        ratio_defect(fsh),
        fc_inv,
        rel_defect(cf::bulk(sp)?, cf::bulk(&rot)?),
        rel_defect(cf::surface(sp)?, cf::surface_h(&rot)?),
        rel_defect(cf::surface_h(sp)?, cf::surface(&rot)?),
        rel_defect(cf::corner(q)?, cf::corner(rot.q())?),
    ])
}

fn spectral<S: Real>(p: &GridPoint) -> Result<SpectralParams<S>> {
    let q = S::from_f64(p.q);
    let lambda = -q.ln() / S::from_i64(2);
    SpectralParams::from_lambda_u(lambda.clone(), lambda * S::from_f64(p.u_frac))
}

/// All eight relations over a point set; points run in parallel and the
/// reports keep the input order.
pub fn verify_numeric<S: Real>(points: &[GridPoint]) -> Result<Vec<IdentityReport>> {
    let per_point: Vec<[f64; 8]> = points
        .par_iter()
        .map(|p| defects_at(&spectral::<S>(p)?))
        .collect::<Result<_>>()?;
    Ok(IDS
        .iter()
        .enumerate()
        .map(|(k, id)| {
            let pts = points
                .iter()
                .zip(&per_point)
                .map(|(p, d)| PointDefect { point: p.label(), defect: d[k] })
                .collect();
            let rep = IdentityReport::new(*id, S::NAME, FLOAT_TOLERANCE, pts);
            if k == 3 || k == 7 {
                rep.with_note("the closed form depends on q alone")
            } else {
                rep
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relations::default_grid;
    use crate::scalar::HpFloat;

    #[test]
    fn bulk_inversion_at_a_single_point() {
        let d = defects_at(&spectral::<f64>(&GridPoint { q: 0.2, u_frac: 0.15 }).unwrap()).unwrap();
        assert!(d[0] <= 1e-12, "{d:?}");
    }

    #[test]
    fn default_grid_passes() {
        let reps = verify_numeric::<f64>(&default_grid(1, 5)).unwrap();
        assert_eq!(reps.len(), 8);
        for r in &reps {
            assert_eq!(r.points.len(), 30);
            assert!(r.pass, "{} {:e} at {:?}", r.id, r.max_defect, r.points.iter().max_by(|a, b| a.defect.total_cmp(&b.defect)));
        }
    }

    #[test]
    fn wrong_xi_shows_up() {
        // a point where xi differs from the product of the two bulk terms if the sign of xi were dropped
        let sp = spectral::<f64>(&GridPoint { q: 0.1, u_frac: 0.3 }).unwrap();
        let prod = cf::bulk_exp_minus(&sp).unwrap() * cf::bulk_exp_minus(&sp.inversion_image()).unwrap();
        assert!(prod < 0.0);
        assert!(ratio_defect(prod / sp.xi().unwrap().abs()) > 1.0);
    }

    #[test]
    fn high_precision_ring() {
        let reps = verify_numeric::<HpFloat>(&[GridPoint { q: 0.2, u_frac: 0.3 }]).unwrap();
        assert!(reps.iter().all(|r| r.pass && r.ring == "hp"), "{reps:?}");
    }
}
