//! Symplectic manifold and connection data in a Darboux chart, the curvature
//! tensor, and the curvature 2-form.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::algebra::{BasePolynomial, FiberMonomial, GaussianRational, WedgeWord};
use crate::calculus::ext_d;
use crate::error::{Error, Result};
use crate::weyl::{TermKey, WeylAlgebra, WeylSeries};

pub type Matrix = Vec<Vec<BigRational>>;

/// A symplectic manifold in Darboux coordinates: constant `ω_{ij}` and its
/// inverse `ω^{ij}` with `ω^{ij}ω_{jk} = δ^i_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifoldSpec {
    dim: usize,
    omega_lower: Matrix,
    omega_upper: Matrix,
}

impl ManifoldSpec {
    /// Standard blocks on `(q^{2a-1}, q^{2a})` with `ω^{12} = +1`, hence
    /// `ω_{12} = −1`.
    pub fn standard(dim: usize) -> Result<Self> {
        if dim == 0 || dim % 2 == 1 {
            return Err(Error::OddDimension(dim));
        }
        let mut lower = vec![vec![BigRational::zero(); dim]; dim];
        for a in 0..dim / 2 {
            lower[2 * a][2 * a + 1] = -BigRational::one();
            lower[2 * a + 1][2 * a] = BigRational::one();
        }
        Self::from_lower(lower)
    }

    pub fn from_lower(omega_lower: Matrix) -> Result<Self> {
        let dim = omega_lower.len();
        if dim == 0 || dim % 2 == 1 {
            return Err(Error::OddDimension(dim));
        }
        if let Some(row) = omega_lower.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
        }
        for i in 0..dim {
            for j in 0..dim {
                if omega_lower[i][j] != -omega_lower[j][i].clone() {
                    return Err(Error::NonAntisymmetricOmega(i, j));
                }
            }
        }
        let omega_upper = invert(&omega_lower).ok_or(Error::DegenerateOmega)?;
        Ok(Self { dim, omega_lower, omega_upper })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn omega_lower(&self) -> &Matrix {
        &self.omega_lower
    }

    pub fn omega_upper(&self) -> &Matrix {
        &self.omega_upper
    }

    pub fn algebra(&self) -> WeylAlgebra {
        WeylAlgebra::from_poisson(&self.omega_upper)
    }

    /// `{f, g} = ω^{ij} ∂_i f ∂_j g`.
    pub fn poisson_bracket(&self, f: &BasePolynomial, g: &BasePolynomial) -> BasePolynomial {
        let mut out = BasePolynomial::zero(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let w = &self.omega_upper[i][j];
                if w.is_zero() {
                    continue;
                }
                let term = &f.dq(i).expect("index in range") * &g.dq(j).expect("index in range");
                out.add_assign_ref(&term.scale_rational(w));
            }
        }
        out
    }
}

/// Gauss-Jordan inverse over the rationals; `None` if singular.
fn invert(m: &Matrix) -> Option<Matrix> {
    let n = m.len();
    let mut a: Matrix = m.clone();
    let mut inv: Matrix = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let t = &f * &a[col][j];
                a[r][j] -= t;
                let t = &f * &inv[col][j];
                inv[r][j] -= t;
            }
        }
    }
    Some(inv)
}

/// Totally symmetric `Γ_{ijk}`, stored once per sorted index triple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectionSpec {
    dim: usize,
    entries: BTreeMap<[usize; 3], BasePolynomial>,
}

fn sorted3(i: usize, j: usize, k: usize) -> [usize; 3] {
    let mut t = [i, j, k];
    t.sort_unstable();
    t
}

impl ConnectionSpec {
    pub fn flat(dim: usize) -> Self {
        Self { dim, entries: BTreeMap::new() }
    }

    /// Sets `Γ_{ijk}` (and all its permutations). A second, different value
    /// for the same index set is an asymmetric input and is rejected.
    pub fn insert(&mut self, i: usize, j: usize, k: usize, value: BasePolynomial) -> Result<()> {
        for &x in &[i, j, k] {
            if x >= self.dim {
                return Err(Error::IndexOutOfRange { index: x, dim: self.dim });
            }
        }
        if value.nvars() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: value.nvars() });
        }
        let key = sorted3(i, j, k);
        match self.entries.get(&key) {
            Some(old) if *old != value => Err(Error::AsymmetricConnection { indices: [i, j, k] }),
            _ => {
                if value.is_zero() {
                    self.entries.remove(&key);
                } else {
                    self.entries.insert(key, value);
                }
                Ok(())
            }
        }
    }

    pub fn with(mut self, i: usize, j: usize, k: usize, value: BasePolynomial) -> Result<Self> {
        self.insert(i, j, k, value)?;
        Ok(self)
    }

    /// Builds a connection from a full (unsymmetrized) coefficient function,
    /// rejecting it unless it is totally symmetric.
    pub fn from_components(dim: usize, f: impl Fn(usize, usize, usize) -> BasePolynomial) -> Result<Self> {
        let mut c = Self::flat(dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let v = f(i, j, k);
                    let key = sorted3(i, j, k);
                    let reference = f(key[0], key[1], key[2]);
                    if v != reference {
                        return Err(Error::AsymmetricConnection { indices: [i, j, k] });
                    }
                    c.insert(i, j, k, v)?;
                }
            }
        }
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> BasePolynomial {
        self.entries.get(&sorted3(i, j, k)).cloned().unwrap_or_else(|| BasePolynomial::zero(self.dim))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[usize; 3], &BasePolynomial)> {
        self.entries.iter()
    }

    pub fn is_flat_chart(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Upper bound on the number of independent `Γ_{ijk}`: `C(2n+2, 2n−1)`.
pub fn max_independent_connection_entries(dim: usize) -> usize {
    // C(dim+2, dim-1) = C(dim+2, 3)
    (dim + 2) * (dim + 1) * dim / 6
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub dim: usize,
    pub connection_entries: usize,
    pub max_independent_entries: usize,
    pub flat_chart: bool,
}

/// Confirms the symplectic form and connection data. In Darboux coordinates
/// total symmetry of `Γ_{ijk}` is equivalent to `ω_{ij;k} = 0`.
pub fn validate(m: &ManifoldSpec, c: &ConnectionSpec) -> Result<ValidationReport> {
    if m.dim != c.dim {
        return Err(Error::DimensionMismatch { expected: m.dim, found: c.dim });
    }
    // the manifold constructor already enforced these; re-check the identity
    for i in 0..m.dim {
        for k in 0..m.dim {
            let s: BigRational = (0..m.dim).map(|j| &m.omega_upper[i][j] * &m.omega_lower[j][k]).sum();
            let expect = if i == k { BigRational::one() } else { BigRational::zero() };
            if s != expect {
                return Err(Error::DegenerateOmega);
            }
        }
    }
    for (key, p) in &c.entries {
        if key.iter().any(|&x| x >= m.dim) {
            return Err(Error::IndexOutOfRange { index: key[2], dim: m.dim });
        }
        if p.nvars() != m.dim {
            return Err(Error::DimensionMismatch { expected: m.dim, found: p.nvars() });
        }
    }
    let max = max_independent_connection_entries(m.dim);
    debug_assert!(c.entries.len() <= max);
    Ok(ValidationReport {
        dim: m.dim,
        connection_entries: c.entries.len(),
        max_independent_entries: max,
        flat_chart: c.entries.is_empty(),
    })
}

/// The connection 1-form `Γ = ½ Γ_{ijk} X^i X^j dq^k`.
pub fn gamma_form(m: &ManifoldSpec, c: &ConnectionSpec) -> WeylSeries {
    let dim = m.dim;
    let half = GaussianRational::from_ratio(1, 2);
    let mut out = WeylSeries::zero(dim);
    for k in 0..dim {
        for i in 0..dim {
            for j in i..dim {
                let g = c.get(i, j, k);
                if g.is_zero() {
                    continue;
                }
                let mut fiber = FiberMonomial::one(dim);
                fiber.0[i] += 1;
                fiber.0[j] += 1;
                let coeff = if i == j { g.scale(&half) } else { g };
                out.add_term(TermKey::new(0, fiber, WedgeWord::from_sorted(&[k]).unwrap()), coeff);
            }
        }
    }
    out
}

/// `(R_Γ)_{ijkl}`, nonzero components only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurvatureTensor {
    dim: usize,
    components: BTreeMap<[usize; 4], BasePolynomial>,
}

impl CurvatureTensor {
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> BasePolynomial {
        self.components.get(&[i, j, k, l]).cloned().unwrap_or_else(|| BasePolynomial::zero(self.dim))
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = (&[usize; 4], &BasePolynomial)> {
        self.components.iter()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// `(R_Γ)_{ijkl} = ∂_kΓ_{ilj} − ∂_lΓ_{ijk} + ω^{mp}Γ_{plj}Γ_{ikm} − ω^{mp}Γ_{pjk}Γ_{ilm}`.
pub fn curvature_tensor(m: &ManifoldSpec, c: &ConnectionSpec) -> CurvatureTensor {
    let n = m.dim;
    let mut components = BTreeMap::new();
    let poisson: Vec<(usize, usize, &BigRational)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|&(a, b)| !m.omega_upper[a][b].is_zero())
        .map(|(a, b)| (a, b, &m.omega_upper[a][b]))
        .collect();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut r = c.get(i, l, j).dq(k).expect("index in range");
                    r.sub_assign_ref(&c.get(i, j, k).dq(l).expect("index in range"));
                    for &(mi, pi, w) in &poisson {
                        let a = &c.get(pi, l, j) * &c.get(i, k, mi);
                        let b = &c.get(pi, j, k) * &c.get(i, l, mi);
                        r.add_assign_ref(&(&a - &b).scale_rational(w));
                    }
                    if !r.is_zero() {
                        components.insert([i, j, k, l], r);
                    }
                }
            }
        }
    }
    CurvatureTensor { dim: n, components }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurvatureRoute {
    /// Assemble `¼ (R_Γ)_{ijkl} X^iX^j dq^k∧dq^l` from the tensor.
    Tensor,
    /// `dΓ + (1/iħ) Γ∘Γ`.
    FormEquation,
}

pub fn curvature_form(m: &ManifoldSpec, c: &ConnectionSpec, via: CurvatureRoute) -> Result<WeylSeries> {
    match via {
        CurvatureRoute::FormEquation => {
            let g = gamma_form(m, c);
            let sq = m.algebra().circ(&g, &g, None)?;
            Ok(ext_d(&g).add(&sq.div_ihbar()?))
        }
        CurvatureRoute::Tensor => {
            let t = curvature_tensor(m, c);
            let n = m.dim;
            let quarter = BigRational::new(BigInt::from(1), BigInt::from(4));
            let mut out = WeylSeries::zero(n);
            for (&[i, j, k, l], r) in &t.components {
                if k == l {
                    continue;
                }
                let mut fiber = FiberMonomial::one(n);
                fiber.0[i] += 1;
                fiber.0[j] += 1;
                let (form, sign) = crate::algebra::wedge_normalize(&[k, l], n)?;
                let coeff = r.scale_rational(&(&quarter * BigRational::from_integer(BigInt::from(sign))));
                out.add_term(TermKey::new(0, fiber, form), coeff);
            }
            Ok(out)
        }
    }
}

/// Dimension of the space of 4-tensors that are symmetric in the first pair,
/// antisymmetric in the last pair, and satisfy the cyclic identity
/// `R_{ijkl} + R_{iklj} + R_{iljk} = 0`, computed as the nullity of the
/// constraint system.
pub fn curvature_component_count(dim: usize) -> usize {
    let n = dim;
    let idx = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
    let unknowns = n.pow(4);
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut r = vec![0i64; unknowns];
                    r[idx(i, j, k, l)] += 1;
                    r[idx(j, i, k, l)] -= 1;
                    rows.push(r);
                    let mut r = vec![0i64; unknowns];
                    r[idx(i, j, k, l)] += 1;
                    r[idx(i, j, l, k)] += 1;
                    rows.push(r);
                    let mut r = vec![0i64; unknowns];
                    r[idx(i, j, k, l)] += 1;
                    r[idx(i, k, l, j)] += 1;
                    r[idx(i, l, j, k)] += 1;
                    rows.push(r);
                }
            }
        }
    }
    unknowns - rank(rows)
}

fn rank(rows: Vec<Vec<i64>>) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows
        .into_iter()
        .filter(|r| r.iter().any(|&x| x != 0))
        .map(|r| r.into_iter().map(|x| BigRational::from_integer(BigInt::from(x))).collect())
        .collect();
    if m.is_empty() {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][col].clone();
        for r in (rank + 1)..m.len() {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &pivot;
            for c2 in col..cols {
                let t = &f * &m[rank][c2];
                m[r][c2] -= t;
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{delta, delta_inv};

    fn cst(dim: usize, v: i64) -> BasePolynomial {
        BasePolynomial::constant(dim, GaussianRational::from_int(v))
    }

    fn curved_2d() -> (ManifoldSpec, ConnectionSpec) {
        let m = ManifoldSpec::standard(2).unwrap();
        let c = ConnectionSpec::flat(2).with(0, 0, 0, cst(2, 1)).unwrap().with(1, 1, 1, cst(2, 1)).unwrap();
        (m, c)
    }

    #[test]
    fn standard_omega_inverse() {
        let m = ManifoldSpec::standard(2).unwrap();
        assert_eq!(m.omega_upper()[0][1], BigRational::one());
        assert_eq!(m.omega_lower()[0][1], -BigRational::one());
        let q = BasePolynomial::var(2, 0).unwrap();
        let p = BasePolynomial::var(2, 1).unwrap();
        assert_eq!(m.poisson_bracket(&q, &p), cst(2, 1));
    }

    #[test]
    fn rejects_bad_omega() {
        assert_eq!(ManifoldSpec::standard(3), Err(Error::OddDimension(3)));
        let z = vec![vec![BigRational::zero(); 2]; 2];
        assert_eq!(ManifoldSpec::from_lower(z), Err(Error::DegenerateOmega));
        let mut s = vec![vec![BigRational::zero(); 2]; 2];
        s[0][1] = BigRational::one();
        s[1][0] = BigRational::one();
        assert!(matches!(ManifoldSpec::from_lower(s), Err(Error::NonAntisymmetricOmega(..))));
    }

    #[test]
    fn validate_examples() {
        let m = ManifoldSpec::standard(2).unwrap();
        assert!(validate(&m, &ConnectionSpec::flat(2)).unwrap().flat_chart);
        let mut c = ConnectionSpec::flat(2);
        c.insert(0, 0, 1, cst(2, 1)).unwrap();
        assert_eq!(c.insert(0, 1, 0, cst(2, 2)), Err(Error::AsymmetricConnection { indices: [0, 1, 0] }));
        let bad =
            ConnectionSpec::from_components(2, |i, j, k| if (i, j, k) == (0, 0, 1) { cst(2, 1) } else { cst(2, 0) });
        assert!(matches!(bad, Err(Error::AsymmetricConnection { .. })));
        let (m, c) = curved_2d();
        let rep = validate(&m, &c).unwrap();
        assert_eq!(rep.connection_entries, 2);
        assert_eq!(rep.max_independent_entries, 4);
    }

    #[test]
    fn gamma_form_examples() {
        let m = ManifoldSpec::standard(2).unwrap();
        assert!(gamma_form(&m, &ConnectionSpec::flat(2)).is_zero());
        let c = ConnectionSpec::flat(2).with(1, 1, 1, cst(2, 1)).unwrap();
        let g = gamma_form(&m, &c);
        assert_eq!(g, WeylSeries::monomial(2, 0, &[0, 2], &[1], GaussianRational::from_ratio(1, 2)));
        assert_eq!(g.max_degree(), Some(2));
        let (m, c) = curved_2d();
        assert!(delta(&gamma_form(&m, &c)).is_zero());
    }

    #[test]
    fn curvature_fixtures() {
        let (m, c) = curved_2d();
        let r = curvature_tensor(&m, &c);
        assert_eq!(r.get(1, 0, 1, 0), cst(2, -1));
        assert_eq!(r.get(0, 1, 1, 0), cst(2, -1));
        assert_eq!(r.get(1, 0, 0, 1), cst(2, 1));

        let m4 = ManifoldSpec::standard(4).unwrap();
        let c4 = ConnectionSpec::flat(4).with(0, 0, 0, BasePolynomial::var(4, 2).unwrap()).unwrap();
        let r4 = curvature_tensor(&m4, &c4);
        assert_eq!(r4.get(0, 0, 2, 0), cst(4, 1));
        assert_eq!(r4.components().count(), 2);
    }

    #[test]
    fn curvature_with_constants_a_b() {
        let m = ManifoldSpec::standard(2).unwrap();
        let c = ConnectionSpec::flat(2).with(0, 0, 0, cst(2, 3)).unwrap().with(1, 1, 1, cst(2, 5)).unwrap();
        assert_eq!(curvature_tensor(&m, &c).get(1, 0, 1, 0), cst(2, -15));
    }

    #[test]
    fn curvature_routes_agree_on_fixture() {
        let (m, c) = curved_2d();
        let a = curvature_form(&m, &c, CurvatureRoute::FormEquation).unwrap();
        let b = curvature_form(&m, &c, CurvatureRoute::Tensor).unwrap();
        assert!(!a.is_zero());
        assert_eq!(a, b);
        assert!(delta(&a).is_zero());
        assert_eq!(delta(&delta_inv(&a)), a);
    }

    #[test]
    fn component_counts() {
        assert_eq!(curvature_component_count(2), 3);
        assert_eq!(curvature_component_count(4), 45);
    }
}
