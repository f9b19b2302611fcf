//! TOML manifests describing a Darboux chart and its connection.
//!
//! ```toml
//! dim = 2
//! # lower-index ω_ij; optional, standard blocks by default
//! omega = [[0, -1], [1, 0]]
//!
//! [[gamma]]
//! indices = [1, 1, 1]
//! poly = "1"
//!
//! [defaults]
//! max_degree = 6
//! hbar_order = 2
//! ```
//!
//! Indices are 1-based. Matrix entries are integers or strings such as
//! `"-1/2"`.

use serde::Deserialize;

use crate::algebra::BasePolynomial;
use crate::error::{Error, Result};
use crate::expr::{parse_polynomial, parse_scalar};
use crate::fedosov::FedosovManifold;
use crate::geometry::{ConnectionSpec, ManifoldSpec};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    dim: usize,
    omega: Option<Vec<Vec<toml::Value>>>,
    #[serde(default)]
    gamma: Vec<RawGamma>,
    #[serde(default)]
    defaults: RawDefaults,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGamma {
    indices: [usize; 3],
    poly: toml::Value,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawDefaults {
    max_degree: Option<u32>,
    hbar_order: Option<u32>,
}

#[derive(Clone, Debug)]
pub struct Manifest {
    pub manifold: ManifoldSpec,
    pub connection: ConnectionSpec,
    pub max_degree: Option<u32>,
    pub hbar_order: Option<u32>,
}

impl Manifest {
    /// Parses and validates a manifest. Syntax errors and malformed
    /// expressions give [`Error::Parse`]; everything else describes an
    /// invalid chart or connection.
    pub fn from_toml_str(src: &str) -> Result<Self> {
        let raw: RawManifest = toml::from_str(src)
            .map_err(|e| Error::Parse { pos: e.span().map_or(0, |s| s.start), msg: e.message().to_string() })?;
        let dim = raw.dim;
        let manifold = match raw.omega {
            None => ManifoldSpec::standard(dim)?,
            Some(rows) => {
                if rows.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: rows.len() });
                }
                let mut m = Vec::with_capacity(dim);
                for row in &rows {
                    if row.len() != dim {
                        return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
                    }
                    m.push(row.iter().map(matrix_entry).collect::<Result<Vec<_>>>()?);
                }
                ManifoldSpec::from_lower(m)?
            }
        };
        let mut connection = ConnectionSpec::flat(dim);
        for g in &raw.gamma {
            for &i in &g.indices {
                if i == 0 || i > dim {
                    return Err(Error::IndexOutOfRange { index: i, dim });
                }
            }
            let poly = gamma_poly(&g.poly, dim, g.indices)?;
            let [i, j, k] = g.indices;
            connection.insert(i - 1, j - 1, k - 1, poly)?;
        }
        Ok(Self { manifold, connection, max_degree: raw.defaults.max_degree, hbar_order: raw.defaults.hbar_order })
    }

    pub fn fedosov(&self) -> Result<FedosovManifold> {
        FedosovManifold::new(self.manifold.clone(), self.connection.clone())
    }
}

fn matrix_entry(v: &toml::Value) -> Result<num_rational::BigRational> {
    let c = match v {
        toml::Value::Integer(n) => return Ok(num_rational::BigRational::from_integer((*n).into())),
        toml::Value::String(s) => parse_scalar(s)?,
        other => {
            return Err(Error::Parse { pos: 0, msg: format!("omega entry {other} must be an integer or a string") })
        }
    };
    if !c.is_real() {
        return Err(Error::Parse { pos: 0, msg: format!("omega entry {c} is not real") });
    }
    Ok(c.re().clone())
}

fn gamma_poly(v: &toml::Value, dim: usize, indices: [usize; 3]) -> Result<BasePolynomial> {
    let label = format!("Gamma_{{{}{}{}}}", indices[0], indices[1], indices[2]);
    match v {
        toml::Value::Integer(n) => Ok(BasePolynomial::constant(dim, crate::algebra::GaussianRational::from_int(*n))),
        toml::Value::String(s) => parse_polynomial(s, dim).map_err(|e| match e {
            Error::Parse { pos, msg } => Error::Parse { pos, msg: format!("{label}: {msg}") },
            other => other,
        }),
        other => Err(Error::Parse { pos: 0, msg: format!("{label}: {other} is not an expression") }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_curved_fixture() {
        let m = Manifest::from_toml_str(
            r#"
            dim = 2
            [[gamma]]
            indices = [1, 1, 1]
            poly = "1"
            [[gamma]]
            indices = [2, 2, 2]
            poly = 1
            [defaults]
            max_degree = 6
            "#,
        )
        .unwrap();
        assert_eq!(m.connection.get(0, 0, 0), BasePolynomial::one(2));
        assert_eq!(m.connection.get(1, 1, 1), BasePolynomial::one(2));
        assert_eq!(m.max_degree, Some(6));
        assert_eq!(m.hbar_order, None);
    }

    #[test]
    fn normalizes_triples_and_rejects_conflicts() {
        let ok =
            "dim = 2\n[[gamma]]\nindices = [2, 1, 1]\npoly = \"q1\"\n[[gamma]]\nindices = [1, 2, 1]\npoly = \"q1\"\n";
        let m = Manifest::from_toml_str(ok).unwrap();
        assert_eq!(m.connection.get(0, 0, 1), BasePolynomial::var(2, 0).unwrap());

        let bad =
            "dim = 2\n[[gamma]]\nindices = [2, 1, 1]\npoly = \"q1\"\n[[gamma]]\nindices = [1, 1, 2]\npoly = \"q2\"\n";
        assert_eq!(Manifest::from_toml_str(bad).unwrap_err(), Error::AsymmetricConnection { indices: [0, 0, 1] });
    }

    #[test]
    fn classifies_errors() {
        assert!(matches!(Manifest::from_toml_str("dim = "), Err(Error::Parse { .. })));
        assert!(matches!(
            Manifest::from_toml_str("dim = 2\n[[gamma]]\nindices=[1,1,1]\npoly=\"q1 +\"\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(Manifest::from_toml_str("dim = 3"), Err(Error::OddDimension(3))));
        assert!(matches!(
            Manifest::from_toml_str("dim = 2\n[[gamma]]\nindices=[1,1,3]\npoly=\"1\"\n"),
            Err(Error::IndexOutOfRange { index: 3, dim: 2 })
        ));
        assert!(matches!(
            Manifest::from_toml_str("dim = 2\nomega = [[0, 1], [1, 0]]\n"),
            Err(Error::NonAntisymmetricOmega(..))
        ));
    }

    #[test]
    fn custom_omega() {
        let m = Manifest::from_toml_str("dim = 2\nomega = [[0, \"-1/2\"], [\"1/2\", 0]]\n").unwrap();
        let q1 = BasePolynomial::var(2, 0).unwrap();
        let q2 = BasePolynomial::var(2, 1).unwrap();
        assert_eq!(
            m.manifold.poisson_bracket(&q1, &q2),
            BasePolynomial::constant(2, crate::GaussianRational::from_int(2))
        );
    }
}
