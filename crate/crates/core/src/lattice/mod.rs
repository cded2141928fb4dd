//! Finite-lattice partition functions: direct spin sums, the random-cluster
//! expansion, and the equivalent six-vertex model on the medial lattice,
//! numerically and as exact series in `t`.

use std::ops::{Add, Mul, Sub};

use num_traits::{One, Zero};

use crate::error::{domain, Result};

pub mod extract;
pub mod potts;
pub mod series;
pub mod sixvertex;
pub mod transfer;

pub use extract::{extract_free_energies, lattice_bundle, SizeTable};
pub use potts::{fk_partition, potts_bruteforce};
pub use series::series_log_z;
pub use sixvertex::{sixvertex_partition, SectorBasis, VertexWeights};
pub use transfer::{max_eigenvalue, potts_transfer_v, DoubleRowTransfer, Eigenpair, PottsTransfer, TransferOperator};

/// Coefficient ring for partition-function contractions.
pub trait Ring:
    Clone + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Send + Sync
{
}

impl<T> Ring for T where
    T: Clone + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Send + Sync
{
}

pub(crate) fn ring_pow<R: Ring>(x: &R, e: usize) -> R {
    let mut acc = R::one();
    let mut base = x.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base.clone();
        }
        base = base.clone() * base;
        e >>= 1;
    }
    acc
}

/// An `M`-row, `N`-column square lattice with free boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeSpec {
    pub m: usize,
    pub n: usize,
}

impl LatticeSpec {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m < 1 || n < 2 {
            return domain(format!("lattice {m}x{n}: need M >= 1 and N >= 2"));
        }
        Ok(LatticeSpec { m, n })
    }

    pub fn sites(&self) -> usize {
        self.m * self.n
    }

    /// Horizontal bonds (coupling `K1`).
    pub fn horizontal_bonds(&self) -> usize {
        self.m * (self.n - 1)
    }

    /// Vertical bonds (coupling `K2`).
    pub fn vertical_bonds(&self) -> usize {
        (self.m - 1) * self.n
    }

    pub fn transposed(&self) -> Self {
        LatticeSpec { m: self.n, n: self.m }
    }
}
