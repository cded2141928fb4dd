//! Workbench for the anisotropic self-dual Potts model with `Q > 4`:
//! exact q-series free energies, lattice transfer matrices, Bethe ansatz
//! roots and the functional relations tying them together.

pub mod bethe;
pub mod bundle;
pub mod cli;
pub mod closedform;
pub mod error;
pub mod lattice;
pub mod params;
pub mod qseries;
pub mod relations;
pub mod scalar;

pub use error::{Error, Pole, Result};
pub use params::{CouplingParams, SpectralParams};
pub use qseries::{LaurentPolyS, TruncatedSeries};
pub use scalar::{HpFloat, Real, Scalar};

pub use num_rational::BigRational;

pub type SpectralParamsF64 = SpectralParams<f64>;
pub type SpectralParamsHp = SpectralParams<HpFloat>;
pub type SpectralParamsQ = SpectralParams<BigRational>;
pub type CouplingsF64 = CouplingParams<f64>;
pub type CouplingsQ = CouplingParams<BigRational>;
