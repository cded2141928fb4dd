//! Bethe ansatz for the maximal eigenvalue of the homogeneous double-row
//! transfer matrix with free boundaries, in the sector of `N` down arrows.
//!
//! In `z`-variables the equations read, for `j = 1..N`,
//!
//! ```text
//! 2N [L(w z_j) + L(q z_j/w) - L(w/z_j) - L(q/(w z_j))] - (2N+2) log z_j
//!   - sum_{m != j} [L(q z_j z_m) + L(q z_j/z_m) - L(q z_m/z_j) - L(q/(z_j z_m))] = 2 pi i I_j
//! ```
//!
//! with `L(y) = log(1 - y)`. The maximal eigenvalue has `I_j = -j`, which at
//! `w -> 0` gives `z_j = exp(i pi j/(N+1))`. On the physical strip every `y`
//! above stays inside the unit disc, so principal logarithms are continuous
//! along the continuation path.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closedform::numeric;
use crate::error::{Error, Result};
use crate::params::SpectralParams;

const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX_ITER: usize = 60;
const COLLISION: f64 = 1e-8;
/// Accepted residual of a solved root set.
pub const RESIDUAL_TOL: f64 = 1e-12;

/// Homotopy in `t = q^{1/4}` at fixed `s`, geometric steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub t0: f64,
    pub ratio: f64,
    /// Steps are halved (in `log t`) down to this ratio before giving up.
    pub min_ratio: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule { t0: 0.01, ratio: 1.2, min_ratio: 1.0 + 1e-7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub t: f64,
    pub newton_iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetheRoots {
    pub n: usize,
    pub roots: Vec<Complex64>,
    pub residual: f64,
    pub trace: Vec<TraceStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetheRootsJson {
    pub n: usize,
    pub roots: Vec<[f64; 2]>,
    pub residual: f64,
    pub trace: Vec<TraceStep>,
}

impl BetheRoots {
    pub fn to_json(&self) -> BetheRootsJson {
        BetheRootsJson {
            n: self.n,
            roots: self.roots.iter().map(|z| [z.re, z.im]).collect(),
            residual: self.residual,
            trace: self.trace.clone(),
        }
    }

    pub fn from_json(j: &BetheRootsJson) -> Self {
        BetheRoots {
            n: j.n,
            roots: j.roots.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
            residual: j.residual,
            trace: j.trace.clone(),
        }
    }

    /// Roots sorted by argument.
    pub fn canonical(&self) -> Vec<Complex64> {
        let mut r = self.roots.clone();
        r.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        r
    }
}

/// `z_j = exp(i pi j/(N+1))`, `j = 1..N`.
pub fn initial_roots(n: usize) -> Vec<Complex64> {
    (1..=n).map(|j| Complex64::from_polar(1.0, std::f64::consts::PI * j as f64 / (n as f64 + 1.0))).collect()
}

fn l(y: Complex64) -> Complex64 {
    (Complex64::new(1.0, 0.0) - y).ln()
}

/// `d/dz log(1 - c z^a)` for `y = c z^a`: `-a y / (z (1 - y))`.
fn dl(y: Complex64, a: f64, z: Complex64) -> Complex64 {
    -a * y / (z * (Complex64::new(1.0, 0.0) - y))
}

/// Log-form defects `F_j` and their Jacobian.
pub fn equations(z: &[Complex64], q: f64, w: f64) -> (Vec<Complex64>, DMatrix<Complex64>) {
    let n = z.len();
    let nn = n as f64;
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let mut f = vec![Complex64::new(0.0, 0.0); n];
    let mut jac = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for j in 0..n {
        let zj = z[j];
        let single = [(w * zj, 1.0, 1.0), (q * zj / w, 1.0, 1.0), (w / zj, -1.0, -1.0), (q / (w * zj), -1.0, -1.0)];
        for (y, a, sign) in single {
            f[j] += 2.0 * nn * sign * l(y);
            jac[(j, j)] += 2.0 * nn * sign * dl(y, a, zj);
        }
        f[j] -= (2.0 * nn + 2.0) * zj.ln();
        jac[(j, j)] -= (2.0 * nn + 2.0) / zj;
        for m in 0..n {
            if m == j {
                continue;
            }
            let zm = z[m];
            // (y, power of z_j, power of z_m, sign)
            let pair = [
                (q * zj * zm, 1.0, 1.0, 1.0),
                (q * zj / zm, 1.0, -1.0, 1.0),
                (q * zm / zj, -1.0, 1.0, -1.0),
                (q / (zj * zm), -1.0, -1.0, -1.0),
            ];
            for (y, aj, am, sign) in pair {
                f[j] -= sign * l(y);
                jac[(j, j)] -= sign * dl(y, aj, zj);
                jac[(j, m)] -= sign * dl(y, am, zm);
            }
        }
        f[j] += two_pi_i * (j as f64 + 1.0);
    }
    (f, jac)
}

/// Largest modulus; NaN if any entry is not finite.
fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, |m, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x) })
}

/// Checks the root-set invariants: upper half plane, distinct, no inverse pairs.
pub fn check_invariants(z: &[Complex64]) -> Result<()> {
    for (j, &a) in z.iter().enumerate() {
        if !(a.im > COLLISION && a.re.is_finite()) {
            return Err(Error::Continuation(format!("root {j} at {a} left the upper half plane")));
        }
        for (k, &b) in z.iter().enumerate().skip(j + 1) {
            if (a - b).norm() <= COLLISION || (a - b.inv()).norm() <= COLLISION {
                return Err(Error::Continuation(format!("roots {j} and {k} collide")));
            }
        }
    }
    Ok(())
}

/// Newton's method on the log-form equations.
pub fn newton(start: &[Complex64], q: f64, w: f64) -> Result<(Vec<Complex64>, f64, usize)> {
    let mut z = start.to_vec();
    for it in 0..NEWTON_MAX_ITER {
        let (f, jac) = equations(&z, q, w);
        let r = max_norm(&f);
        if !r.is_finite() {
            break;
        }
        if r <= NEWTON_TOL {
            return Ok((z, r, it));
        }
        let rhs = DVector::from_iterator(z.len(), f.iter().map(|c| -c));
        let step = jac.lu().solve(&rhs).ok_or_else(|| Error::Convergence("singular Bethe Jacobian".into()))?;
        for (zi, d) in z.iter_mut().zip(step.iter()) {
            *zi += d;
        }
    }
    let (f, _) = equations(&z, q, w);
    let r = max_norm(&f);
    if r <= RESIDUAL_TOL {
        return Ok((z, r, NEWTON_MAX_ITER));
    }
    Err(Error::Convergence(format!("Newton stalled at residual {r:e}")))
}

/// Minimal-cost assignment (Hungarian method); `result[i]` is the column of row `i`.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut res = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            res[p[j] - 1] = j - 1;
        }
    }
    res
}

fn keeps_labels(prev: &[Complex64], next: &[Complex64]) -> bool {
    let cost: Vec<Vec<f64>> = next.iter().map(|a| prev.iter().map(|b| (a - b).norm()).collect()).collect();
    min_cost_assignment(&cost).iter().enumerate().all(|(i, &j)| i == j)
}

/// Continues the `w -> 0` roots to `(q, w)` at fixed `s = w^2/q^{1/2}`.
pub fn solve(n: usize, q: f64, w: f64, schedule: Schedule) -> Result<BetheRoots> {
    if n == 0 {
        return Ok(BetheRoots { n, roots: vec![], residual: 0.0, trace: vec![] });
    }
    if !(q > 0.0 && q < 1.0 && w > 0.0) {
        return Err(Error::Domain(format!("(q, w) = ({q}, {w}) outside q in (0,1), w > 0")));
    }
    let t_target = q.powf(0.25);
    let s = w * w / q.sqrt();
    let at = |t: f64| (t.powi(4), s.sqrt() * t);
    let mut t = schedule.t0.min(t_target);
    let (q0, w0) = at(t);
    let (mut z, mut res, it) = newton(&initial_roots(n), q0, w0)?;
    check_invariants(&z)?;
    let mut trace = vec![TraceStep { t, newton_iterations: it, residual: res }];
    let mut ratio = schedule.ratio;
    while t < t_target {
        let t_next = (t * ratio).min(t_target);
        let (qn, wn) = at(t_next);
        let attempt = newton(&z, qn, wn).and_then(|(zn, r, it)| {
            check_invariants(&zn)?;
            if !keeps_labels(&z, &zn) {
                return Err(Error::Continuation(format!("roots swapped between t = {t} and {t_next}")));
            }
            Ok((zn, r, it))
        });
        match attempt {
            Ok((zn, r, it)) => {
                z = zn;
                res = r;
                t = t_next;
                trace.push(TraceStep { t, newton_iterations: it, residual: r });
                ratio = (ratio * ratio).min(schedule.ratio);
            }
            Err(e) => {
                ratio = ratio.sqrt();
                if ratio < schedule.min_ratio {
                    return Err(Error::Continuation(format!("step size exhausted at t = {t}: {e}")));
                }
            }
        }
    }
    Ok(BetheRoots { n, roots: z, residual: res, trace })
}

/// `Lambda^2` from the root product and from `R(z)`.
pub fn eigenvalue(roots: &[Complex64], q: f64, w: f64) -> Result<(f64, f64)> {
    let n = roots.len() as i32;
    let one = Complex64::new(1.0, 0.0);
    for z in roots {
        if (w / z - one).norm() < COLLISION || (w * z - one).norm() < COLLISION {
            return Err(Error::Domain("root at a pole of the eigenvalue".into()));
        }
    }
    let pre = w.powi(2 * n) / q.powi(n);
    let product: Complex64 = roots
        .iter()
        .map(|&z| (one - q / (w * z)) * (one - q * z / w) / ((one - w / z) * (one - w * z)))
        .product();
    let r = |x: f64| -> Complex64 { roots.iter().map(|&zm| (one - x / zm) * (one - x * zm)).product() };
    let rform = r(q / w) / r(w);
    Ok(((pre * product).re, (pre * rform).re))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRow {
    pub n: usize,
    pub lambda2: f64,
    pub f_s: f64,
    pub deviation: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceTable {
    pub q: f64,
    pub s: f64,
    pub f_s_closed: f64,
    pub rows: Vec<SurfaceRow>,
    /// Least-squares slope of `log |deviation|` against `N`.
    pub log_decay_rate: Option<f64>,
}

/// Finite-width surface free energy `f_s^{(N)} = -(N/2) log Q + N log x - log Lambda^2 - N f_b`.
pub fn finite_surface(n: usize, sp: &SpectralParams<f64>, schedule: Schedule) -> Result<(f64, f64, f64)> {
    let roots = solve(n, *sp.q(), *sp.w(), schedule)?;
    let (lam2, _) = eigenvalue(&roots.roots, *sp.q(), *sp.w())?;
    let x = sp.x()?;
    if x <= 0.0 || lam2 <= 0.0 {
        return Err(Error::Domain("finite surface free energy needs x > 0 and Lambda^2 > 0".into()));
    }
    let nf = n as f64;
    let fs = -0.5 * nf * sp.potts_q().ln() + nf * x.ln() - lam2.ln() - nf * numeric::bulk(sp)?;
    Ok((fs, lam2, roots.residual))
}

pub fn surface_convergence(n_max: usize, sp: &SpectralParams<f64>, schedule: Schedule) -> Result<SurfaceTable> {
    let closed = numeric::surface(sp)?;
    let rows: Vec<SurfaceRow> = (2..=n_max)
        .into_par_iter()
        .map(|n| {
            finite_surface(n, sp, schedule).map(|(f_s, lambda2, residual)| SurfaceRow {
                n,
                lambda2,
                f_s,
                deviation: f_s - closed,
                residual,
            })
        })
        .collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.deviation != 0.0).map(|r| (r.n as f64, r.deviation.abs().ln())).collect();
    let log_decay_rate = (pts.len() >= 2).then(|| {
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    Ok(SurfaceTable { q: *sp.q(), s: sp.s(), f_s_closed: closed, rows, log_decay_rate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{max_eigenvalue, DoubleRowTransfer, TransferOperator};

    fn sp(q: f64, s: f64) -> SpectralParams<f64> {
        SpectralParams::from_ts(q.powf(0.25), s).unwrap()
    }

    #[test]
    fn initial_root_angles() {
        let z = initial_roots(1);
        assert!((z[0] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let z = initial_roots(3);
        for (k, r) in z.iter().enumerate() {
            assert!((r.arg() - std::f64::consts::PI * (k as f64 + 1.0) / 4.0).abs() < 1e-15);
            assert!((r.powi(8) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn matches_dense_transfer() {
        for (q, s) in [(0.2, 1.0), (0.2, 2.0)] {
            let p = sp(q, s);
            for n in 2..=4 {
                let roots = solve(n, q, *p.w(), Schedule::default()).unwrap();
                assert!(roots.residual <= RESIDUAL_TOL);
                let (a, b) = eigenvalue(&roots.roots, q, *p.w()).unwrap();
                assert!((a - b).abs() <= 1e-12 * a.abs());
                let dense = max_eigenvalue(&DoubleRowTransfer::new(n, &p).unwrap()).unwrap();
                assert!((a - dense.value).abs() <= 1e-10 * a.abs(), "N={n} q={q} s={s}: {a} vs {}", dense.value);
            }
        }
    }

    #[test]
    fn off_strip_state_is_not_dominant() {
        // at (q, s) = (0.3, 0.5) the path from w -> 0 crosses x = 0, where the
        // double-row transfer is the identity, and the continued state ends up
        // at the bottom of the spectrum
        let p = sp(0.3, 0.5);
        assert!(!p.is_physical());
        let roots = solve(2, 0.3, *p.w(), Schedule::default()).unwrap();
        let (a, _) = eigenvalue(&roots.roots, 0.3, *p.w()).unwrap();
        let m = DoubleRowTransfer::new(2, &p).unwrap().to_dense().unwrap();
        let evs: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.re).collect();
        assert!(evs.iter().any(|e| (e - a).abs() < 1e-10 * a));
        let top = evs.iter().copied().fold(f64::MIN, f64::max);
        assert!(top > a * 1.4);
    }

    #[test]
    fn one_root_against_companion_matrix() {
        // N = 1: [(1 - w z)(1 - q z/w)]^2 = [(z - w)(z - q/w)]^2
        let (q, w) = (0.2f64, 0.6f64);
        // ascending coefficients
        let left = [1.0, -(w + q / w), q];
        let right = [q, -(w + q / w), 1.0];
        let sq = |p: [f64; 3]| -> [f64; 5] {
            let mut out = [0.0; 5];
            for i in 0..3 {
                for j in 0..3 {
                    out[i + j] += p[i] * p[j];
                }
            }
            out
        };
        let lhs = sq(left);
        let rhs = sq(right);
        let poly: Vec<f64> = lhs.iter().zip(rhs.iter()).map(|(x, y)| x - y).collect();
        let lead = poly[4];
        let companion = DMatrix::from_fn(4, 4, |i, j| {
            if j == 3 {
                -poly[i] / lead
            } else if i == j + 1 {
                1.0
            } else {
                0.0
            }
        });
        let roots = companion.complex_eigenvalues();
        let z = solve(1, q, w, Schedule::default()).unwrap().roots[0];
        assert!(roots.iter().any(|r| (r - z).norm() < 1e-10), "{z} not in {roots:?}");
    }

    #[test]
    fn surface_deviation_shrinks() {
        let t = surface_convergence(8, &sp(0.2, 1.0), Schedule::default()).unwrap();
        for pair in t.rows.windows(2) {
            assert!(pair[1].deviation.abs() < pair[0].deviation.abs());
        }
        assert!(t.log_decay_rate.unwrap() < 0.0);
    }

    #[test]
    fn small_w_limit() {
        let (q, w) = (1e-10, 1e-4);
        let roots = solve(3, q, w, Schedule::default()).unwrap();
        let (a, _) = eigenvalue(&roots.roots, q, w).unwrap();
        let lim = w.powi(6) / q.powi(3);
        assert!((a / lim - 1.0).abs() < 1e-3);
        for (r, z0) in roots.canonical().iter().zip(initial_roots(3)) {
            assert!((r - z0).norm() < 1e-3);
        }
    }

    #[test]
    fn json_uses_pairs() {
        let r = solve(2, 0.2, 0.6, Schedule::default()).unwrap();
        let j = serde_json::to_value(r.to_json()).unwrap();
        assert_eq!(j["roots"][0].as_array().unwrap().len(), 2);
        let back = BetheRoots::from_json(&serde_json::from_value(j).unwrap());
        assert_eq!(back.roots, r.roots);
    }

    #[test]
    fn hungarian_small() {
        let c = vec![vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]];
        assert_eq!(min_cost_assignment(&c), vec![1, 0, 2]);
    }
}
