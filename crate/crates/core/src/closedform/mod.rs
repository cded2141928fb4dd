//! Closed-form free energies, as exact series and as numbers.

pub mod series;
pub mod critical;
pub mod inversion;
pub mod numeric;

pub use critical::{conjugate_modulus, fc_asymptote, fs_continuation_check, ob_surface_integral, CriticalParams};
pub use inversion::{derive_from_inversion, InversionDerivation};
pub use series::closed_form_bundle;
