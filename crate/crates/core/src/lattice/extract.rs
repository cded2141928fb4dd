//! Free energies from finite-lattice series.
//!
//! Once a lattice is large enough, every coefficient through `t^T` of
//! `log(Z_P/Q^{MN})` has the form `-MN f_b - M f_s - N f'_s - f_c`; four
//! sizes fix the four series and every further size must agree exactly.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::series::{series_log_z, MAX_SERIES_COLUMNS};
use super::LatticeSpec;
use crate::bundle::{CornerSeries, Route, SeriesBundle, Stabilization};
use crate::error::{Error, Result};
use crate::qseries::TruncatedSeries;

/// `log(Z_P/Q^{MN})` series keyed by `(M, N)`.
pub type SizeTable = BTreeMap<(usize, usize), TruncatedSeries>;

fn row(m: usize, n: usize) -> [BigRational; 4] {
    let c = |v: usize| BigRational::from_integer(v.into());
    [c(m * n), c(m), c(n), BigRational::one()]
}

/// Rank of a small rational matrix by elimination.
fn rank(rows: &[[BigRational; 4]]) -> usize {
    let mut a: Vec<[BigRational; 4]> = rows.to_vec();
    let mut r = 0;
    for col in 0..4 {
        let Some(p) = (r..a.len()).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(r, p);
        for i in 0..a.len() {
            if i != r && !a[i][col].is_zero() {
                let f = a[i][col].clone() / a[r][col].clone();
                for k in 0..4 {
                    let d = f.clone() * a[r][k].clone();
                    a[i][k] -= d;
                }
            }
        }
        r += 1;
    }
    r
}

fn invert4(m: &[[BigRational; 4]; 4]) -> Option<[[BigRational; 4]; 4]> {
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = r.to_vec();
            v.extend((0..4).map(|k| if k == i { BigRational::one() } else { BigRational::zero() }));
            v
        })
        .collect();
    for col in 0..4 {
        let p = (col..4).find(|&i| !a[i][col].is_zero())?;
        a.swap(col, p);
        let piv = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v = v.clone() / piv.clone();
        }
        for i in 0..4 {
            if i != col && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for k in 0..8 {
                    let d = f.clone() * a[col][k].clone();
                    a[i][k] -= d;
                }
            }
        }
    }
    Some(std::array::from_fn(|i| std::array::from_fn(|k| a[i][k + 4].clone())))
}

/// Solves for `(f_b + log Q, f_s, f'_s, f_c)` on four sizes and checks the rest.
pub fn extract_free_energies(table: &SizeTable, order: i32) -> Result<SeriesBundle> {
    if table.len() < 5 {
        return Err(Error::Domain(format!("need at least 5 lattice sizes, got {}", table.len())));
    }
    let mut solve: Vec<(usize, usize)> = Vec::new();
    let mut rows: Vec<[BigRational; 4]> = Vec::new();
    for &(m, n) in table.keys() {
        if solve.len() == 4 {
            break;
        }
        rows.push(row(m, n));
        if rank(&rows) == rows.len() {
            solve.push((m, n));
        } else {
            rows.pop();
        }
    }
    if solve.len() < 4 {
        return Err(Error::Domain("lattice sizes do not separate the four free energies".into()));
    }
    let a: [[BigRational; 4]; 4] = std::array::from_fn(|i| rows[i].clone());
    let inv = invert4(&a).ok_or_else(|| Error::Domain("singular size matrix".into()))?;
    let rhs: Vec<TruncatedSeries> = solve.iter().map(|k| table[k].truncate(order)).collect();
    let unknown: Vec<TruncatedSeries> = (0..4)
        .map(|i| {
            (0..4).fold(TruncatedSeries::zero(order), |acc, j| &acc - &rhs[j].scale(&inv[i][j]))
        })
        .collect();

    let checks: Vec<(usize, usize)> = table.keys().copied().filter(|k| !solve.contains(k)).collect();
    let mut first_residual: Option<i32> = None;
    for &(m, n) in &checks {
        let coef = row(m, n);
        let mut predicted = TruncatedSeries::zero(order);
        for i in 0..4 {
            predicted = &predicted - &unknown[i].scale(&coef[i]);
        }
        if let Some(d) = table[&(m, n)].truncate(order).first_difference(&predicted) {
            first_residual = Some(first_residual.map_or(d, |f| f.min(d)));
        }
    }
    if let Some(d) = first_residual {
        return Err(Error::NotStabilized { order: d });
    }
    let [f_b, f_s, f_s_h, f_c]: [TruncatedSeries; 4] = unknown.try_into().expect("four unknowns");
    Ok(SeriesBundle {
        route: Route::Lattice,
        f_b_reduced: f_b,
        f_s,
        f_s_h,
        f_c: CornerSeries::Known(f_c),
        stabilization: Some(Stabilization { solve_pairs: solve, check_pairs: checks, first_residual }),
    })
}

/// Smallest lattice side used for order `T`. Finite-width corrections to
/// the four-term form first appear at `t^{2 min(M,N) + 4}`.
pub fn stabilization_side(order: i32) -> usize {
    ((order.max(0) as usize) / 2).saturating_sub(1).max(2)
}

/// Lattice route: series for sizes around `a = stabilization_side(order)`,
/// wide lattices obtained from narrow ones by `s -> 1/s`.
pub fn lattice_bundle(order: i32) -> Result<SeriesBundle> {
    let a = stabilization_side(order);
    if a + 1 > MAX_SERIES_COLUMNS {
        return Err(Error::SizeGuard(format!(
            "order t^{order} needs {}-column lattices; the contraction stops at {MAX_SERIES_COLUMNS}",
            a + 1
        )));
    }
    let direct = [(a, a), (a + 1, a), (a + 2, a), (a + 1, a + 1)];
    let computed: Vec<((usize, usize), TruncatedSeries)> = direct
        .par_iter()
        .map(|&(m, n)| series_log_z(LatticeSpec::new(m, n)?, order).map(|s| ((m, n), s)))
        .collect::<Result<_>>()?;
    let mut table = SizeTable::new();
    for ((m, n), s) in computed {
        if m != n {
            table.insert((n, m), s.invert_s());
        }
        table.insert((m, n), s);
    }
    extract_free_energies(&table, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::LaurentPolyS;

    fn q(a: i64) -> BigRational {
        BigRational::from_integer(a.into())
    }

    #[test]
    fn synthetic_round_trip() {
        let order = 6;
        let mk = |c: i64, sd: i32| TruncatedSeries::from_poly(LaurentPolyS::monomial(q(c), sd), 2, order);
        let (fb, fs, fsh, fc) = (mk(3, 0), mk(-2, 1), mk(5, -1), mk(7, 0));
        let mut table = SizeTable::new();
        for (m, n) in [(3, 3), (3, 4), (4, 3), (4, 4), (5, 3)] {
            let v = &(&(&fb.scale(&q((m * n) as i64)) + &fs.scale(&q(m as i64))) + &fsh.scale(&q(n as i64))) + &fc;
            table.insert((m, n), v.scale(&q(-1)));
        }
        let b = extract_free_energies(&table, order).unwrap();
        assert_eq!(b.f_b_reduced, fb);
        assert_eq!(b.f_s, fs);
        assert_eq!(b.f_s_h, fsh);
        assert_eq!(b.f_c.known().unwrap(), &fc);

        // a wrong fifth size is caught at its first bad order
        table.insert((5, 3), &table[&(5, 3)] + &mk(1, 0).shift_t(2));
        assert!(matches!(extract_free_energies(&table, order), Err(Error::NotStabilized { order: 4 })));
    }

    #[test]
    fn lattice_route_matches_closed_forms() {
        let order = 10;
        let b = lattice_bundle(order).unwrap();
        let cf = crate::closedform::closed_form_bundle(order).unwrap();
        assert_eq!(b.f_b_reduced, cf.f_b_reduced);
        assert_eq!(b.f_s, cf.f_s);
        assert_eq!(b.f_s_h, cf.f_s_h);
        assert_eq!(b.f_c, cf.f_c);
        assert!(lattice_bundle(36).is_err());
    }

    #[test]
    fn too_few_sizes() {
        let mut table = SizeTable::new();
        for k in 0..4 {
            table.insert((3 + k, 3), TruncatedSeries::zero(4));
        }
        assert!(extract_free_energies(&table, 4).is_err());
    }
}
