//! Row transfer operators and their dominant eigenpairs.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use super::sixvertex::{apply_vertex, RowKind, SectorBasis, VertexWeights};
use crate::error::{Error, Result};
use crate::params::SpectralParams;

/// Largest Potts spin-basis dimension `Q^N`.
pub const POTTS_DIM_LIMIT: usize = 300_000;
/// Operators up to this dimension are diagonalized densely.
pub const DENSE_LIMIT: usize = 1024;
const POWER_ITERATIONS: usize = 200_000;
const RESIDUAL_TOL: f64 = 1e-12;

pub trait TransferOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[f64]) -> Vec<f64>;
    fn is_symmetric(&self) -> bool;

    fn to_dense(&self) -> Result<DMatrix<f64>> {
        let d = self.dim();
        if d > DENSE_LIMIT {
            return Err(Error::SizeGuard(format!("dense {d}x{d} operator")));
        }
        let cols: Vec<Vec<f64>> = (0..d)
            .into_par_iter()
            .map(|k| {
                let mut e = vec![0.0; d];
                e[k] = 1.0;
                self.apply(&e)
            })
            .collect();
        Ok(DMatrix::from_fn(d, d, |i, k| cols[k][i]))
    }
}

/// Symmetrized Potts row transfer `V = T2^{1/2} T1 T2^{1/2}` on `Q^N` spin rows.
#[derive(Debug, Clone)]
pub struct PottsTransfer {
    n: usize,
    q: usize,
    exp_k1: f64,
    /// `T2^{1/2}` per site is `a I + b J`.
    sqrt_site: (f64, f64),
    site: (f64, f64),
}

/// Builds `V` for integer `Q`. `T2` is the `N`-fold tensor power of
/// `(e^{K2} - 1) I + J`, whose eigenvalues are `e^{K2} - 1` and `Delta = e^{K2} + Q - 1`.
pub fn potts_transfer_v(n: usize, q: u32, exp_k1: f64, exp_k2: f64) -> Result<PottsTransfer> {
    let qf = q as f64;
    if n == 0 || q == 0 {
        return Err(Error::Domain("need N >= 1 and Q >= 1".into()));
    }
    if qf.powi(n as i32) > POTTS_DIM_LIMIT as f64 {
        return Err(Error::SizeGuard(format!("{q}^{n} spin rows")));
    }
    let small = exp_k2 - 1.0;
    let delta = exp_k2 + qf - 1.0;
    if small < 0.0 || delta <= 0.0 {
        return Err(Error::Domain(format!("site matrix with e^K2 = {exp_k2} is not positive semidefinite")));
    }
    let (rs, rd) = (small.sqrt(), delta.sqrt());
    Ok(PottsTransfer { n, q: q as usize, exp_k1, sqrt_site: (rs, (rd - rs) / qf), site: (small, 1.0) })
}

impl PottsTransfer {
    /// Self-dual couplings at integer `Q = q + 2 + 1/q`.
    pub fn from_spectral(n: usize, sp: &SpectralParams<f64>) -> Result<Self> {
        let c = sp.couplings()?;
        let q = c.potts_q.round();
        if (c.potts_q - q).abs() > 1e-9 || q < 1.0 {
            return Err(Error::Domain(format!("Q = {} is not an integer", c.potts_q)));
        }
        potts_transfer_v(n, q as u32, c.exp_k1, c.exp_k2)
    }

    fn digit(&self, idx: usize, site: usize) -> usize {
        idx / self.q.pow(site as u32) % self.q
    }

    /// `(a I + b J)` on every site.
    fn apply_sites(&self, (a, b): (f64, f64), v: &[f64]) -> Vec<f64> {
        let mut cur = v.to_vec();
        for site in 0..self.n {
            let stride = self.q.pow(site as u32);
            let mut next = vec![0.0; cur.len()];
            for base in 0..cur.len() {
                if self.digit(base, site) != 0 {
                    continue;
                }
                let sum: f64 = (0..self.q).map(|k| cur[base + k * stride]).sum();
                for k in 0..self.q {
                    next[base + k * stride] = a * cur[base + k * stride] + b * sum;
                }
            }
            cur = next;
        }
        cur
    }

    pub fn apply_t1(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(idx, &x)| {
                let bonds = (0..self.n.saturating_sub(1)).filter(|&j| self.digit(idx, j) == self.digit(idx, j + 1)).count();
                x * self.exp_k1.powi(bonds as i32)
            })
            .collect()
    }

    pub fn apply_t2(&self, v: &[f64]) -> Vec<f64> {
        self.apply_sites(self.site, v)
    }
}

impl TransferOperator for PottsTransfer {
    fn dim(&self) -> usize {
        self.q.pow(self.n as u32)
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let h = self.apply_sites(self.sqrt_site, v);
        let h = self.apply_t1(&h);
        self.apply_sites(self.sqrt_site, &h)
    }

    fn is_symmetric(&self) -> bool {
        true
    }
}

/// Homogeneous double-row six-vertex transfer on the `n = N` sector:
/// a horizontal-bond row after a vertical-bond row, both with internal
/// weights `(alpha, beta) = (1, x)`.
#[derive(Debug, Clone)]
pub struct DoubleRowTransfer {
    basis: SectorBasis,
    weights: VertexWeights<f64>,
}

impl DoubleRowTransfer {
    pub fn new(n: usize, sp: &SpectralParams<f64>) -> Result<Self> {
        Ok(DoubleRowTransfer { basis: SectorBasis::half_filled(n)?, weights: VertexWeights::self_dual(sp)? })
    }

    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }
}

impl TransferOperator for DoubleRowTransfer {
    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.basis.strands() / 2;
        let w = &self.weights;
        let mut cur = v.to_vec();
        for kind in [RowKind::Vertical, RowKind::Horizontal] {
            for a in kind.pairs(n) {
                cur = apply_vertex(&self.basis, a, &1.0, &w.x1, w, &cur);
            }
        }
        cur
    }

    fn is_symmetric(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// `|A v - value v| / |value|` with `|v| = 1`.
    pub residual: f64,
}

fn residual(op: &dyn TransferOperator, value: f64, v: &[f64]) -> f64 {
    let av = op.apply(v);
    let r: f64 = av.iter().zip(v).map(|(a, b)| (a - value * b).powi(2)).sum::<f64>().sqrt();
    r / value.abs()
}

fn normalized(v: DVector<f64>) -> Vec<f64> {
    let n = v.norm();
    // fix the sign so the largest component is positive
    let big = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    let s = if big < 0.0 { -1.0 } else { 1.0 };
    v.iter().map(|x| s * x / n).collect()
}

/// Eigenvalue of largest real part and its eigenvector.
pub fn max_eigenvalue(op: &dyn TransferOperator) -> Result<Eigenpair> {
    if op.dim() <= DENSE_LIMIT {
        let a = op.to_dense()?;
        let (value, vector) = if op.is_symmetric() {
            let eig = SymmetricEigen::new(a.clone());
            let k = eig.eigenvalues.imax();
            (eig.eigenvalues[k], normalized(eig.eigenvectors.column(k).into_owned()))
        } else {
            let evs = a.complex_eigenvalues();
            let best = evs
                .iter()
                .filter(|z| z.im.abs() <= 1e-9 * z.norm().max(1e-300))
                .map(|z| z.re)
                .fold(f64::NEG_INFINITY, f64::max);
            if !best.is_finite() {
                return Err(Error::Convergence("no real eigenvalue found".into()));
            }
            let shifted = &a - DMatrix::identity(a.nrows(), a.ncols()) * best;
            let svd = shifted.svd(false, true);
            let vt = svd.v_t.ok_or_else(|| Error::Convergence("SVD without right vectors".into()))?;
            let k = svd.singular_values.imin();
            (best, normalized(vt.row(k).transpose()))
        };
        let residual = residual(op, value, &vector);
        return Ok(Eigenpair { value, vector, residual });
    }
    power_iteration(op)
}

fn power_iteration(op: &dyn TransferOperator) -> Result<Eigenpair> {
    let d = op.dim();
    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut value = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let av = op.apply(&v);
        value = av.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
        let norm = av.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Convergence("operator annihilated the start vector".into()));
        }
        let r: f64 = av.iter().zip(&v).map(|(a, b)| (a - value * b).powi(2)).sum::<f64>().sqrt() / value.abs();
        v = av.into_iter().map(|x| x / norm).collect();
        if r <= RESIDUAL_TOL {
            let residual = residual(op, value, &v);
            return Ok(Eigenpair { value, vector: v, residual });
        }
    }
    Err(Error::Convergence(format!("power iteration stalled near {value} after {POWER_ITERATIONS} steps")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t2_on_uniform_row() {
        let op = potts_transfer_v(3, 5, 2.0, 1.7).unwrap();
        let ones = vec![1.0; op.dim()];
        let delta: f64 = 1.7 + 4.0;
        for x in op.apply_t2(&ones) {
            assert!((x - delta.powi(3)).abs() < 1e-12 * delta.powi(3));
        }
    }

    #[test]
    fn single_site_has_no_horizontal_bond() {
        let op = potts_transfer_v(1, 3, 9.0, 2.5).unwrap();
        let v = op.to_dense().unwrap();
        let t2 = DMatrix::from_fn(3, 3, |i, j| if i == j { 2.5 } else { 1.0 });
        assert!((v - t2).abs().max() < 1e-12);
    }

    #[test]
    fn two_state_two_site_entries() {
        // oracle: symmetric square root by eigendecomposition
        let (e1, e2) = (1.8, 2.4);
        let op = potts_transfer_v(2, 2, e1, e2).unwrap();
        let site = DMatrix::from_row_slice(2, 2, &[e2, 1.0, 1.0, e2]);
        let eig = SymmetricEigen::new(site.clone());
        let root = &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * eig.eigenvectors.transpose();
        let half = root.kronecker(&root);
        // index = s0 + 2 s1; bond when s0 == s1
        let t1 = DMatrix::from_diagonal(&DVector::from_vec(vec![e1, 1.0, 1.0, e1]));
        let expect = &half * t1 * &half;
        assert!((op.to_dense().unwrap() - expect).abs().max() < 1e-12);
    }

    #[test]
    fn dominant_eigenvalues() {
        let op = potts_transfer_v(3, 3, 1.0, 1.0).unwrap();
        let e = max_eigenvalue(&op).unwrap();
        assert!((e.value - 27.0).abs() < 1e-10);
        assert!(e.residual < 1e-12);

        // T2 alone: K1 = 0
        let op = potts_transfer_v(2, 4, 1.0, 3.0).unwrap();
        let e = max_eigenvalue(&op).unwrap();
        assert!((e.value - 36.0).abs() < 1e-10);
        for x in &e.vector {
            assert!((x - 0.25).abs() < 1e-10);
        }
    }

    #[test]
    fn power_iteration_agrees_with_dense() {
        let op = potts_transfer_v(4, 3, 1.6, 1.3).unwrap();
        let dense = max_eigenvalue(&op).unwrap();
        let power = power_iteration(&op).unwrap();
        assert!((dense.value - power.value).abs() < 1e-10 * dense.value);
    }

    #[test]
    fn rejects_negative_site_matrix() {
        assert!(potts_transfer_v(2, 3, 1.0, 0.5).is_err());
    }

    #[test]
    fn double_row_is_real_dominant() {
        let sp = SpectralParams::from_ts(0.2f64.powf(0.25), 2.0).unwrap();
        let op = DoubleRowTransfer::new(3, &sp).unwrap();
        let e = max_eigenvalue(&op).unwrap();
        assert!(e.value > 0.0 && e.residual < 1e-10);
    }
}
