//! The operators `δ`, `δ⁻¹`, `d`, the Hodge split, and the exterior covariant
//! derivative.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::algebra::{BasePolynomial, FiberMonomial, GaussianRational};
use crate::error::Result;
use crate::weyl::{TermKey, WeylAlgebra, WeylSeries};

/// `δa = dq^k ∧ ∂a/∂X^k`. Lowers the degree by one.
pub fn delta(a: &WeylSeries) -> WeylSeries {
    a.map_terms(-1, |key, c, emit| {
        for (k, &e) in key.fiber.exps().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let Some((form, sign)) = key.form.prepend(k) else {
                continue;
            };
            let mut fiber = key.fiber.clone();
            fiber.0[k] -= 1;
            let factor = GaussianRational::from_int(e as i64 * sign as i64);
            emit(TermKey::new(key.hbar, fiber, form), c.scale(&factor));
        }
    })
}

/// `δ⁻¹a = (1/(l+m)) X^k ∂/∂q^k ⌋ a` on a term with `l` fiber factors and
/// form degree `m`; zero when `l + m = 0`. Raises the degree by one.
///
/// The contraction into `dq^{j₁}∧⋯∧dq^{j_m}` gives
/// `Σ_α (−1)^{α−1} X^{j_α} · (word without j_α)`.
pub fn delta_inv(a: &WeylSeries) -> WeylSeries {
    a.map_terms(1, |key, c, emit| {
        let l = key.fiber.len() as i64;
        let m = key.form.len() as i64;
        if l + m == 0 || m == 0 {
            return;
        }
        let norm = BigRational::new(BigInt::from(1), BigInt::from(l + m));
        for (pos, j) in key.form.indices().enumerate() {
            let mut fiber = key.fiber.clone();
            fiber.0[j] += 1;
            let sign = if pos % 2 == 0 { norm.clone() } else { -norm.clone() };
            emit(TermKey::new(key.hbar, fiber, key.form.remove_at(pos)), c.scale_rational(&sign));
        }
    })
}

/// Exterior derivative on the base: `da = ∂c/∂q^k dq^k ∧ (rest)`.
pub fn ext_d(a: &WeylSeries) -> WeylSeries {
    let dim = a.dim();
    a.map_terms(0, |key, c, emit| {
        for k in 0..dim {
            let Some((form, sign)) = key.form.prepend(k) else {
                continue;
            };
            let dc = c.dq(k).expect("coordinate index within dimension");
            if dc.is_zero() {
                continue;
            }
            let dc = if sign < 0 { -&dc } else { dc };
            emit(TermKey::new(key.hbar, key.fiber.clone(), form), dc);
        }
    })
}

/// The three parts of `a = δδ⁻¹a + δ⁻¹δa + a₀₀`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HodgeSplit {
    pub exact: WeylSeries,
    pub coexact: WeylSeries,
    /// The X-free, form-free part: a function on the base, possibly
    /// ħ-dependent.
    pub harmonic: WeylSeries,
}

pub fn hodge_split(a: &WeylSeries) -> HodgeSplit {
    HodgeSplit {
        exact: delta(&delta_inv(a)),
        coexact: delta_inv(&delta(a)),
        harmonic: a.filter(|k| k.fiber.is_one() && k.form.is_empty()),
    }
}

/// `∂_γ a = da + (1/iħ)[γ, a]`.
pub fn covariant_d(alg: &WeylAlgebra, gamma: &WeylSeries, a: &WeylSeries) -> Result<WeylSeries> {
    let bracket = alg.commutator(gamma, a, None)?.div_ihbar()?;
    Ok(ext_d(a).add(&bracket))
}

/// The constant 2-form `−½ ω_{ij} dq^i ∧ dq^j` as a series.
pub fn central_symplectic_form(omega_lower: &[Vec<BigRational>]) -> WeylSeries {
    let dim = omega_lower.len();
    let mut out = WeylSeries::zero(dim);
    for i in 0..dim {
        for j in (i + 1)..dim {
            // −½(ω_ij dq^i∧dq^j + ω_ji dq^j∧dq^i) = −ω_ij dq^i∧dq^j
            let w = -omega_lower[i][j].clone();
            if w == BigRational::from_integer(0.into()) {
                continue;
            }
            let mut term = WeylSeries::zero(dim);
            term.add_term(
                TermKey::new(0, FiberMonomial::one(dim), crate::algebra::WedgeWord::from_sorted(&[i, j]).unwrap()),
                BasePolynomial::constant(dim, GaussianRational::real(w)),
            );
            out = out.add(&term);
        }
    }
    out
}
