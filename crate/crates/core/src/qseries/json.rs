use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::laurent::LaurentPolyS;
use super::series::TruncatedSeries;
use crate::error::{Error, Result};

pub const SERIES_VAR: &str = "q^(1/4)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct STermJson {
    pub sdeg: i32,
    pub num: String,
    pub den: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesTermJson {
    pub tdeg: i32,
    pub s_terms: Vec<STermJson>,
}

/// Wire format of a [`TruncatedSeries`]; exact integers as decimal strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub var: String,
    pub order: i32,
    pub terms: Vec<SeriesTermJson>,
}

impl From<&TruncatedSeries> for SeriesJson {
    fn from(s: &TruncatedSeries) -> Self {
        SeriesJson {
            var: SERIES_VAR.to_string(),
            order: s.order(),
            terms: s
                .terms()
                .map(|(tdeg, p)| SeriesTermJson {
                    tdeg,
                    s_terms: p
                        .terms()
                        .map(|(sdeg, c)| STermJson {
                            sdeg,
                            num: c.numer().to_string(),
                            den: c.denom().to_string(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<&SeriesJson> for TruncatedSeries {
    type Error = Error;

    fn try_from(j: &SeriesJson) -> Result<Self> {
        if j.var != SERIES_VAR {
            return Err(Error::Series(format!("unexpected series variable {:?}", j.var)));
        }
        let parse = |x: &str| -> Result<BigInt> {
            x.parse().map_err(|_| Error::Series(format!("bad integer {x:?}")))
        };
        let mut acc = TruncatedSeries::zero(j.order);
        for term in &j.terms {
            let mut p = LaurentPolyS::zero();
            for st in &term.s_terms {
                let den = parse(&st.den)?;
                if den == BigInt::from(0) {
                    return Err(Error::Series("zero denominator".into()));
                }
                p.add_term(st.sdeg, BigRational::new(parse(&st.num)?, den));
            }
            acc = &acc + &TruncatedSeries::from_poly(p, term.tdeg, j.order);
        }
        Ok(acc)
    }
}

impl TruncatedSeries {
    pub fn to_json(&self) -> SeriesJson {
        SeriesJson::from(self)
    }

    pub fn from_json(j: &SeriesJson) -> Result<Self> {
        Self::try_from(j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let s = &TruncatedSeries::monomial(BigRational::new((-3).into(), 7.into()), -2, 3, 10)
            + &TruncatedSeries::monomial(BigRational::from_integer(5.into()), 1, 6, 10);
        let j = s.to_json();
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.contains(r#""var":"q^(1/4)""#));
        assert!(text.contains(r#""num":"-3""#));
        let back: SeriesJson = serde_json::from_str(&text).unwrap();
        assert_eq!(TruncatedSeries::from_json(&back).unwrap(), s);
    }
}
