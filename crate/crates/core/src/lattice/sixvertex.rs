//! The six-vertex model on the medial lattice.
//!
//! A row state is `2N` arrows on the diagonal edges between two rows of
//! medial vertices, bit `1` meaning down. Strands are numbered `0..2N` from
//! the left. Every vertex acts on a neighbouring pair `(a, a+1)` as
//! `alpha + beta E`, where `E` is the Temperley-Lieb generator
//!
//! ```text
//!   (u,d) -> (u,d): e^{-lambda}     (u,d) -> (d,u): 1
//!   (d,u) -> (d,u): e^{lambda}      (d,u) -> (u,d): 1
//! ```
//!
//! and equal arrows pass through with weight `alpha`. A horizontal bond of
//! the Potts lattice is a vertex on pair `(2j-1, 2j)` with `alpha = 1`,
//! `beta = x1`; a vertical bond is a vertex on `(2j, 2j+1)` with
//! `alpha = x2`, `beta = 1`. The bottom boundary caps every pair
//! `(2j, 2j+1)` with `(u,d) -> 1`, `(d,u) -> e^{lambda}`, the top one with
//! `(u,d) -> e^{-lambda}`, `(d,u) -> 1`. Each closed loop then carries
//! `e^{lambda} + e^{-lambda} = Q^{1/2}` and `Z_P = Q^{MN/2} Z_6V`.
//! The outermost strands `0` and `2N-1` never meet a horizontal-bond vertex.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{ring_pow, LatticeSpec, Ring};
use crate::error::{Error, Result};
use crate::params::SpectralParams;
use crate::scalar::Scalar;

/// Largest `N` accepted by the numeric contractions.
pub const MAX_COLUMNS: usize = 12;
const PAR_THRESHOLD: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq)]
pub struct VertexWeights<R> {
    pub x1: R,
    pub x2: R,
    pub e_lambda: R,
    pub e_minus_lambda: R,
}

impl<S: Scalar> VertexWeights<S> {
    /// Weights on the self-dual line, `x1 = x`, `x2 = 1/x`, `e^{lambda} = t^{-2}`.
    pub fn self_dual(sp: &SpectralParams<S>) -> Result<Self> {
        let x = sp.x()?;
        if x.is_zero() {
            return Err(Error::Domain("x = 0 (w^2 = q) has no vertical weights".into()));
        }
        let t2 = sp.t().clone() * sp.t().clone();
        Ok(VertexWeights { x1: x.clone(), x2: S::one() / x, e_lambda: S::one() / t2.clone(), e_minus_lambda: t2 })
    }
}

impl VertexWeights<Complex64> {
    /// General couplings at any `Q > 0`; `lambda` is imaginary for `Q < 4`.
    pub fn from_couplings(potts_q: f64, exp_k1: f64, exp_k2: f64) -> Self {
        let sq = potts_q.sqrt();
        let lambda = Complex64::new(sq / 2.0, 0.0).acosh();
        VertexWeights {
            x1: Complex64::new((exp_k1 - 1.0) / sq, 0.0),
            x2: Complex64::new((exp_k2 - 1.0) / sq, 0.0),
            e_lambda: lambda.exp(),
            e_minus_lambda: (-lambda).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// Vertices on the horizontal bonds of one Potts row.
    Horizontal,
    /// Vertices on the vertical bonds between two Potts rows.
    Vertical,
}

impl RowKind {
    /// Left strand of each vertex in the row.
    pub fn pairs(self, n: usize) -> impl Iterator<Item = usize> {
        let (start, count) = match self {
            RowKind::Horizontal => (1, n - 1),
            RowKind::Vertical => (0, n),
        };
        (0..count).map(move |j| start + 2 * j)
    }
}

/// All `2N`-arrow states with a fixed number of down arrows, in increasing
/// numeric order, with constant-time-ish ranking.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    strands: usize,
    states: Vec<u64>,
    binom: Vec<Vec<u64>>,
}

impl SectorBasis {
    pub fn new(strands: usize, downs: usize) -> Result<Self> {
        if strands > 40 || downs > strands {
            return Err(Error::SizeGuard(format!("{strands} strands with {downs} down arrows")));
        }
        let mut binom = vec![vec![0u64; strands + 2]; strands + 2];
        for i in 0..=strands + 1 {
            binom[i][0] = 1;
            for k in 1..=i {
                binom[i][k] = binom[i - 1][k - 1] + if k < i { binom[i - 1][k] } else { 0 };
            }
        }
        let size = binom[strands][downs] as usize;
        let mut states = Vec::with_capacity(size);
        if downs == 0 {
            states.push(0);
        } else {
            // Gosper's hack enumerates k-subsets in increasing order
            let mut v: u64 = (1u64 << downs) - 1;
            let limit = 1u64 << strands;
            while v < limit {
                states.push(v);
                let c = v & v.wrapping_neg();
                let r = v + c;
                v = (((r ^ v) >> 2) / c) | r;
            }
        }
        Ok(SectorBasis { strands, states, binom })
    }

    /// The physical sector of an `N`-column lattice: `2N` strands, `N` down.
    pub fn half_filled(n: usize) -> Result<Self> {
        if n > MAX_COLUMNS {
            return Err(Error::SizeGuard(format!("N = {n} exceeds {MAX_COLUMNS} columns")));
        }
        Self::new(2 * n, n)
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn state(&self, i: usize) -> u64 {
        self.states[i]
    }

    /// Position of `state` in [`Self::states`] (colexicographic rank).
    pub fn rank(&self, state: u64) -> usize {
        let mut r = 0u64;
        let mut s = state;
        let mut i = 1;
        while s != 0 {
            let p = s.trailing_zeros() as usize;
            r += self.binom[p][i];
            i += 1;
            s &= s - 1;
        }
        r as usize
    }
}

/// Arrow pair `(bit a, bit a+1)` as `(down_left, down_right)`.
fn pair_bits(state: u64, a: usize) -> (bool, bool) {
    (state >> a & 1 == 1, state >> (a + 1) & 1 == 1)
}

/// Applies `alpha + beta E` on strands `(a, a+1)`.
pub fn apply_vertex<R: Ring>(basis: &SectorBasis, a: usize, alpha: &R, beta: &R, w: &VertexWeights<R>, v: &[R]) -> Vec<R> {
    let diag_ud = alpha.clone() + beta.clone() * w.e_minus_lambda.clone();
    let diag_du = alpha.clone() + beta.clone() * w.e_lambda.clone();
    let mask = 3u64 << a;
    let entry = |i: usize| -> R {
        let st = basis.state(i);
        match pair_bits(st, a) {
            (false, false) | (true, true) => alpha.clone() * v[i].clone(),
            (dl, _) => {
                let d = if dl { &diag_du } else { &diag_ud };
                d.clone() * v[i].clone() + beta.clone() * v[basis.rank(st ^ mask)].clone()
            }
        }
    };
    if v.len() >= PAR_THRESHOLD {
        (0..v.len()).into_par_iter().map(entry).collect()
    } else {
        (0..v.len()).map(entry).collect()
    }
}

pub fn apply_row<R: Ring>(basis: &SectorBasis, kind: RowKind, w: &VertexWeights<R>, v: &[R]) -> Vec<R> {
    let n = basis.strands() / 2;
    let (alpha, beta) = match kind {
        RowKind::Horizontal => (R::one(), w.x1.clone()),
        RowKind::Vertical => (w.x2.clone(), R::one()),
    };
    let mut cur = v.to_vec();
    for a in kind.pairs(n) {
        cur = apply_vertex(basis, a, &alpha, &beta, w, &cur);
    }
    cur
}

/// Bottom boundary vector.
pub fn bottom_vector<R: Ring>(basis: &SectorBasis, w: &VertexWeights<R>) -> Vec<R> {
    boundary(basis, &R::one(), &w.e_lambda)
}

/// Top boundary covector.
pub fn top_covector<R: Ring>(basis: &SectorBasis, w: &VertexWeights<R>) -> Vec<R> {
    boundary(basis, &w.e_minus_lambda, &R::one())
}

fn boundary<R: Ring>(basis: &SectorBasis, ud: &R, du: &R) -> Vec<R> {
    let n = basis.strands() / 2;
    basis
        .states()
        .iter()
        .map(|&st| {
            let mut acc = R::one();
            for j in 0..n {
                match pair_bits(st, 2 * j) {
                    (false, true) => acc = acc * ud.clone(),
                    (true, false) => acc = acc * du.clone(),
                    _ => return R::zero(),
                }
            }
            acc
        })
        .collect()
}

/// `Z_6V = <top| H (V H)^{M-1} |bottom>`.
pub fn sixvertex_partition<R: Ring>(spec: LatticeSpec, w: &VertexWeights<R>) -> Result<R> {
    let basis = SectorBasis::half_filled(spec.n)?;
    let mut v = bottom_vector(&basis, w);
    for r in 0..spec.m {
        if r > 0 {
            v = apply_row(&basis, RowKind::Vertical, w, &v);
        }
        v = apply_row(&basis, RowKind::Horizontal, w, &v);
    }
    let top = top_covector(&basis, w);
    Ok(top.into_iter().zip(v).fold(R::zero(), |acc, (a, b)| acc + a * b))
}

/// `Q^{MN/2} Z_6V`, given `Q^{1/2}` in the ring.
pub fn potts_via_sixvertex<R: Ring>(spec: LatticeSpec, sqrt_q: &R, w: &VertexWeights<R>) -> Result<R> {
    Ok(ring_pow(sqrt_q, spec.sites()) * sixvertex_partition(spec, w)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{fk_partition, potts_bruteforce};
    use num_rational::BigRational;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn ranks_match_positions() {
        let b = SectorBasis::new(10, 4).unwrap();
        assert_eq!(b.len(), 210);
        for (i, &s) in b.states().iter().enumerate() {
            assert_eq!(b.rank(s), i);
            assert_eq!(s.count_ones(), 4);
        }
    }

    #[test]
    fn single_column_loop() {
        // N = 1: one closed loop
        let spec = LatticeSpec { m: 1, n: 1 };
        let w = VertexWeights::from_couplings(5.0, 2.0, 2.0);
        let z = potts_via_sixvertex(spec, &Complex64::new(5f64.sqrt(), 0.0), &w).unwrap();
        assert!((z - Complex64::new(5.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn matches_spin_sum_below_and_above_four() {
        for (q, e1, e2) in [(3u32, 2.0, 1.5), (5, 2.0, 0.7), (2, 1.3, 3.1)] {
            for (m, n) in [(1, 2), (2, 2), (3, 2), (2, 3)] {
                let spec = LatticeSpec::new(m, n).unwrap();
                let w = VertexWeights::from_couplings(q as f64, e1, e2);
                let z6 = potts_via_sixvertex(spec, &Complex64::new((q as f64).sqrt(), 0.0), &w).unwrap();
                let zp = potts_bruteforce(spec, q, &e1, &e2).unwrap();
                assert!((z6 - zp).norm() <= 1e-12 * zp, "{q} {m}x{n}: {z6} vs {zp}");
            }
        }
    }

    #[test]
    fn exact_at_rational_self_dual_point() {
        // t = 1/2 (q = 1/16), s = 9/4: everything rational, Q^{1/2} = (1+q)/t^2
        let sp = SpectralParams::from_ts(r(1, 2), r(9, 4)).unwrap();
        let w = VertexWeights::self_dual(&sp).unwrap();
        let c = sp.couplings().unwrap();
        let sqrt_q = sp.sqrt_potts_q();
        for (m, n) in [(1, 2), (2, 2), (2, 3), (3, 2)] {
            let spec = LatticeSpec::new(m, n).unwrap();
            let z6 = potts_via_sixvertex(spec, &sqrt_q, &w).unwrap();
            let one = r(1, 1);
            let fk = fk_partition(spec, &c.potts_q, &(c.exp_k1.clone() - one.clone()), &(c.exp_k2.clone() - one)).unwrap();
            assert_eq!(z6, fk);
        }
    }
}
