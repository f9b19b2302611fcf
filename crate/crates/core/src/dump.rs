//! Lossless JSON dumps of Weyl series.
//!
//! ```json
//! {"dim": 2, "known_through": 6, "terms": [
//!   {"hbar_power": 0, "fiber_exponents": [2, 1], "wedge_indices": [2],
//!    "coeff_poly": [{"exponents": [0, 0], "coeff": "-1/3"}]}]}
//! ```
//!
//! Wedge indices are 1-based. `known_through` is `null` for exact series.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::algebra::{BasePolynomial, FiberMonomial, WedgeWord};
use crate::error::{Error, Result};
use crate::expr::parse_scalar;
use crate::weyl::{Known, WeylSeries, WeylTerm};

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SeriesDump {
    pub dim: usize,
    pub known_through: Option<i64>,
    pub terms: Vec<TermRecord>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct TermRecord {
    pub hbar_power: u32,
    pub fiber_exponents: Vec<u32>,
    pub wedge_indices: Vec<usize>,
    pub coeff_poly: Vec<CoeffRecord>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct CoeffRecord {
    pub exponents: Vec<u32>,
    pub coeff: String,
}

fn invalid(msg: String) -> Error {
    Error::Parse { pos: 0, msg }
}

impl SeriesDump {
    pub fn from_series(s: &WeylSeries) -> Self {
        let terms = s
            .to_terms()
            .into_iter()
            .map(|t| TermRecord {
                hbar_power: t.hbar,
                fiber_exponents: t.fiber.exps().to_vec(),
                wedge_indices: t.form.indices().map(|i| i + 1).collect(),
                coeff_poly: t
                    .coeff
                    .terms()
                    .map(|(e, c)| CoeffRecord { exponents: e.clone(), coeff: c.to_string() })
                    .collect(),
            })
            .collect();
        let known_through = match s.known() {
            Known::All => None,
            Known::Through(n) => Some(n),
        };
        Self { dim: s.dim(), known_through, terms }
    }

    pub fn to_series(&self) -> Result<WeylSeries> {
        let dim = self.dim;
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if t.fiber_exponents.len() != dim {
                return Err(invalid(format!("fiber exponents {:?} do not match dim {dim}", t.fiber_exponents)));
            }
            if t.wedge_indices.iter().any(|&i| i == 0 || i > dim) {
                return Err(invalid(format!("wedge indices {:?} outside 1..={dim}", t.wedge_indices)));
            }
            let zero_based: Vec<usize> = t.wedge_indices.iter().map(|i| i - 1).collect();
            let form = WedgeWord::from_sorted(&zero_based)
                .ok_or_else(|| invalid(format!("wedge indices {:?} not strictly increasing", t.wedge_indices)))?;
            let mut coeff = BasePolynomial::zero(dim);
            for c in &t.coeff_poly {
                if c.exponents.len() != dim {
                    return Err(invalid(format!("exponents {:?} do not match dim {dim}", c.exponents)));
                }
                let value = parse_scalar(&c.coeff)?;
                if value.is_zero() {
                    return Err(invalid("stored coefficient is zero".into()));
                }
                coeff.add_term(c.exponents.clone(), value);
            }
            if coeff.is_zero() {
                return Err(invalid("term with zero coefficient".into()));
            }
            terms.push(WeylTerm { hbar: t.hbar_power, fiber: FiberMonomial(t.fiber_exponents.clone()), form, coeff });
        }
        let s = WeylSeries::from_terms(dim, terms);
        Ok(match self.known_through {
            None => s,
            Some(n) => s.truncate(n),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(src: &str) -> Result<Self> {
        serde_json::from_str(src).map_err(|e| Error::Parse { pos: e.column(), msg: e.to_string() })
    }
}
