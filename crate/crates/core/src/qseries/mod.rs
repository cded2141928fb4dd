//! Exact truncated series in `t = q^{1/4}` whose coefficients are Laurent
//! polynomials in the anisotropy `s`.

mod json;
mod laurent;
mod product;
mod ratfunc;
mod series;

pub use json::{SeriesJson, SeriesTermJson, STermJson};
pub use laurent::{rational_to, LaurentPolyS};
pub use product::{expand_product, lambert_sum, pattern_product, LambertTerm, ProductFactor};
pub use ratfunc::{QPoly, RatFunc};
pub use series::TruncatedSeries;

/// Default truncation order in `t` (through `q^9`).
pub const DEFAULT_ORDER: i32 = 36;
