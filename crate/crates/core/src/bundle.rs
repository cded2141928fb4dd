//! Free-energy bundles `(f_b, f_s, f'_s, f_c)` tagged with the route that
//! produced them.
//!
//! Series bundles carry the bulk term reduced, `f_b + log Q`. With this
//! normalization the finite-lattice expansion of `log(Z / Q^{MN})` has no
//! leading logarithm and every entry is a power series in `t`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::qseries::{SeriesJson, TruncatedSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    ClosedForm,
    Lattice,
    Bethe,
    Inversion,
}

/// The corner free energy as a series. Inversion leaves its constant term
/// undetermined; that case keeps the determined remainder separately.
#[derive(Debug, Clone, PartialEq)]
pub enum CornerSeries {
    Known(TruncatedSeries),
    UndeterminedConstant { rest: TruncatedSeries },
}

impl CornerSeries {
    pub fn known(&self) -> Option<&TruncatedSeries> {
        match self {
            CornerSeries::Known(s) => Some(s),
            CornerSeries::UndeterminedConstant { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Stabilization {
    /// Lattice sizes `(M, N)` used in the linear solve.
    pub solve_pairs: Vec<(usize, usize)>,
    /// Additional sizes on which the solution was checked.
    pub check_pairs: Vec<(usize, usize)>,
    /// First `t`-degree with a nonzero residual on a check pair, if any.
    pub first_residual: Option<i32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesBundle {
    pub route: Route,
    pub f_b_reduced: TruncatedSeries,
    pub f_s: TruncatedSeries,
    pub f_s_h: TruncatedSeries,
    pub f_c: CornerSeries,
    pub stabilization: Option<Stabilization>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesBundleJson {
    pub route: Route,
    pub f_b_reduced: SeriesJson,
    pub f_s: SeriesJson,
    pub f_s_h: SeriesJson,
    /// `null` when the constant term is undetermined.
    pub f_c: Option<SeriesJson>,
    /// Nonconstant part of `f_c` when its constant is undetermined.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_c_nonconstant: Option<SeriesJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stabilization: Option<Stabilization>,
}

impl SeriesBundle {
    pub fn order(&self) -> i32 {
        let c = match &self.f_c {
            CornerSeries::Known(s) => s.order(),
            CornerSeries::UndeterminedConstant { rest } => rest.order(),
        };
        self.f_b_reduced.order().min(self.f_s.order()).min(self.f_s_h.order()).min(c)
    }

    pub fn to_json(&self) -> SeriesBundleJson {
        let (f_c, f_c_nonconstant) = match &self.f_c {
            CornerSeries::Known(s) => (Some(s.to_json()), None),
            CornerSeries::UndeterminedConstant { rest } => (None, Some(rest.to_json())),
        };
        SeriesBundleJson {
            route: self.route,
            f_b_reduced: self.f_b_reduced.to_json(),
            f_s: self.f_s.to_json(),
            f_s_h: self.f_s_h.to_json(),
            f_c,
            f_c_nonconstant,
            stabilization: self.stabilization.clone(),
        }
    }

    /// One CSV row per exact coefficient: `quantity,tdeg,sdeg,num,den`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["quantity", "tdeg", "sdeg", "num", "den"]).map_err(csv_err)?;
        let mut rows = vec![
            ("f_b_reduced", &self.f_b_reduced),
            ("f_s", &self.f_s),
            ("f_s_h", &self.f_s_h),
        ];
        match &self.f_c {
            CornerSeries::Known(s) => rows.push(("f_c", s)),
            CornerSeries::UndeterminedConstant { rest } => rows.push(("f_c_nonconstant", rest)),
        }
        for (name, s) in rows {
            for (d, p) in s.terms() {
                for (k, c) in p.terms() {
                    out.write_record([
                        name.to_string(),
                        d.to_string(),
                        k.to_string(),
                        c.numer().to_string(),
                        c.denom().to_string(),
                    ])
                    .map_err(csv_err)?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    crate::error::Error::Io(std::io::Error::other(e.to_string()))
}

/// Free energies evaluated at a numeric point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericBundle {
    pub route: Route,
    pub q: f64,
    pub s: f64,
    pub f_b: f64,
    pub f_s: f64,
    pub f_s_h: f64,
    /// Absent when the route does not determine it.
    pub f_c: Option<f64>,
    pub physical: bool,
}

impl NumericBundle {
    pub fn write_csv<W: std::io::Write>(bundles: &[NumericBundle], w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for b in bundles {
            out.serialize(b).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}
