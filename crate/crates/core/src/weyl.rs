//! Formal Weyl-algebra series with values in differential forms.
//!
//! A [`WeylSeries`] is a finite sum of terms `ħ^k · c(q) · X^α · dq^J`,
//! graded by `2k + |α|`. Every series carries a [`Known`] bound: grades above
//! it are not asserted, and every operation propagates the bound so that no
//! grade is ever reported from incomplete data.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::algebra::{BasePolynomial, FiberMonomial, GaussianRational, WedgeWord};
use crate::error::{Error, Result};

/// The monomial part of a term: `ħ^hbar · X^fiber · dq^form`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct TermKey {
    pub hbar: u32,
    pub fiber: FiberMonomial,
    pub form: WedgeWord,
}

impl TermKey {
    pub fn new(hbar: u32, fiber: FiberMonomial, form: WedgeWord) -> Self {
        Self { hbar, fiber, form }
    }

    /// Fedosov degree `2k + l`.
    pub fn degree(&self) -> u32 {
        2 * self.hbar + self.fiber.len()
    }

    pub fn form_degree(&self) -> usize {
        self.form.len()
    }
}

// Grade, then form degree, then ħ-power, fiber exponents (lex), wedge word.
impl Ord for TermKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.form.len().cmp(&other.form.len()))
            .then_with(|| self.hbar.cmp(&other.hbar))
            .then_with(|| self.fiber.cmp(&other.fiber))
            .then_with(|| self.form.cmp(&other.form))
    }
}

impl PartialOrd for TermKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One graded monomial with its coefficient function.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WeylTerm {
    pub hbar: u32,
    pub fiber: FiberMonomial,
    pub form: WedgeWord,
    pub coeff: BasePolynomial,
}

impl WeylTerm {
    pub fn degree(&self) -> u32 {
        2 * self.hbar + self.fiber.len()
    }

    fn key(&self) -> TermKey {
        TermKey::new(self.hbar, self.fiber.clone(), self.form.clone())
    }
}

impl fmt::Display for WeylTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.coeff)?;
        if self.hbar == 1 {
            write!(f, "*hbar")?;
        } else if self.hbar > 1 {
            write!(f, "*hbar^{}", self.hbar)?;
        }
        for (k, &e) in self.fiber.exps().iter().enumerate() {
            match e {
                0 => {}
                1 => write!(f, "*X{}", k + 1)?,
                _ => write!(f, "*X{}^{}", k + 1, e)?,
            }
        }
        if !self.form.is_empty() {
            write!(f, " {}", self.form)?;
        }
        Ok(())
    }
}

/// How far a series is known: every grade, or every grade up to a bound.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Known {
    All,
    Through(i64),
}

impl Known {
    pub fn min(self, other: Known) -> Known {
        match (self, other) {
            (Known::All, k) | (k, Known::All) => k,
            (Known::Through(a), Known::Through(b)) => Known::Through(a.min(b)),
        }
    }

    pub fn shift(self, by: i64) -> Known {
        match self {
            Known::All => Known::All,
            Known::Through(n) => Known::Through(n + by),
        }
    }

    pub fn covers(self, grade: i64) -> bool {
        match self {
            Known::All => true,
            Known::Through(n) => grade <= n,
        }
    }

    fn require(self, grade: i64) -> Result<()> {
        match self {
            Known::Through(n) if grade > n => Err(Error::InsufficientPrecision { requested: grade, available: n }),
            _ => Ok(()),
        }
    }
}

/// The answer of [`WeylSeries::degree`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SeriesDegree {
    /// The zero series; its degree is undefined.
    Zero,
    Exact(u32),
    /// Truncation hides the answer: the degree is at least `at_least`
    /// (`None` when nothing nonzero is known) and grades above
    /// `known_through` are unknown.
    Masked {
        at_least: Option<u32>,
        known_through: i64,
    },
}

/// A polynomial in `ħ` with base-polynomial coefficients: the image of the
/// projection `σ`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HbarPoly {
    nvars: usize,
    coeffs: BTreeMap<u32, BasePolynomial>,
}

impl HbarPoly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, coeffs: BTreeMap::new() }
    }

    pub fn from_poly(p: BasePolynomial) -> Self {
        let mut out = Self::zero(p.nvars());
        out.add_at(0, &p);
        out
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn add_at(&mut self, k: u32, p: &BasePolynomial) {
        if p.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(k).or_insert_with(|| BasePolynomial::zero(self.nvars));
        slot.add_assign_ref(p);
        if slot.is_zero() {
            self.coeffs.remove(&k);
        }
    }

    /// Coefficient of `ħ^k`.
    pub fn get(&self, k: u32) -> BasePolynomial {
        self.coeffs.get(&k).cloned().unwrap_or_else(|| BasePolynomial::zero(self.nvars))
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &BasePolynomial)> {
        self.coeffs.iter().map(|(&k, p)| (k, p))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_power(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn truncate(&self, max_power: u32) -> Self {
        Self { nvars: self.nvars, coeffs: self.coeffs.range(..=max_power).map(|(&k, p)| (k, p.clone())).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, p) in other.iter() {
            out.add_at(k, &-p);
        }
        out
    }
}

impl fmt::Display for HbarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(&k, p)| match k {
                0 => p.to_string(),
                1 => format!("hbar*({})", p),
                _ => format!("hbar^{}*({})", k, p),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A truncated formal series of Weyl-algebra valued forms.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WeylSeries {
    dim: usize,
    terms: BTreeMap<TermKey, BasePolynomial>,
    known: Known,
}

impl WeylSeries {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new(), known: Known::All }
    }

    /// Zero through grade `n`, nothing asserted above.
    pub fn zero_through(dim: usize, n: i64) -> Self {
        Self { dim, terms: BTreeMap::new(), known: Known::Through(n) }
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = WeylTerm>) -> Self {
        let mut out = Self::zero(dim);
        for t in terms {
            out.add_term(t.key(), t.coeff);
        }
        out
    }

    /// An X-free, form-free function of `q` (grade 0).
    pub fn function(p: BasePolynomial) -> Self {
        let dim = p.nvars();
        let mut out = Self::zero(dim);
        out.add_term(TermKey::new(0, FiberMonomial::one(dim), WedgeWord::empty()), p);
        out
    }

    pub fn constant(dim: usize, c: GaussianRational) -> Self {
        Self::function(BasePolynomial::constant(dim, c))
    }

    /// A single term `c · ħ^hbar · X^fiber · dq^form` with constant `c`.
    pub fn monomial(dim: usize, hbar: u32, fiber: &[u32], form: &[usize], c: GaussianRational) -> Self {
        let form = WedgeWord::from_sorted(form).expect("form indices must be strictly increasing");
        let mut out = Self::zero(dim);
        out.add_term(TermKey::new(hbar, FiberMonomial(fiber.to_vec()), form), BasePolynomial::constant(dim, c));
        out
    }

    /// The fiber variable `X^{k+1}`.
    pub fn x(dim: usize, k: usize) -> Self {
        let mut e = vec![0; dim];
        e[k] = 1;
        Self::monomial(dim, 0, &e, &[], GaussianRational::one())
    }

    /// Embed an ħ-polynomial of functions as an X-free 0-form.
    pub fn embed(h: &HbarPoly) -> Self {
        let dim = h.nvars();
        let mut out = Self::zero(dim);
        for (k, p) in h.iter() {
            out.add_term(TermKey::new(k, FiberMonomial::one(dim), WedgeWord::empty()), p.clone());
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn known(&self) -> Known {
        self.known
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&TermKey, &BasePolynomial)> {
        self.terms.iter()
    }

    pub fn to_terms(&self) -> Vec<WeylTerm> {
        self.terms
            .iter()
            .map(|(k, c)| WeylTerm { hbar: k.hbar, fiber: k.fiber.clone(), form: k.form.clone(), coeff: c.clone() })
            .collect()
    }

    pub fn coeff(&self, key: &TermKey) -> BasePolynomial {
        self.terms.get(key).cloned().unwrap_or_else(|| BasePolynomial::zero(self.dim))
    }

    /// Adds `c · key`, cancelling to zero where needed. Terms above the known
    /// bound are discarded.
    pub fn add_term(&mut self, key: TermKey, c: BasePolynomial) {
        debug_assert_eq!(key.fiber.dim(), self.dim);
        if c.is_zero() || !self.known.covers(key.degree() as i64) {
            return;
        }
        match self.terms.entry(key) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                o.get_mut().add_assign_ref(&c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Marks the series as known only through grade `n`, dropping higher
    /// grades.
    pub fn truncate(&self, n: i64) -> Self {
        let known = self.known.min(Known::Through(n));
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| known.covers(k.degree() as i64))
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
            known,
        }
    }

    /// Forget truncation: assert that the stored terms are the whole series.
    pub fn assume_exact(mut self) -> Self {
        self.known = Known::All;
        self
    }

    pub(crate) fn with_known(mut self, known: Known) -> Self {
        self.known = known;
        let k = known;
        self.terms.retain(|key, _| k.covers(key.degree() as i64));
        self
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.degree()).min()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.degree()).max()
    }

    /// Maximal degree of the nonzero components.
    pub fn degree(&self) -> SeriesDegree {
        match (self.known, self.max_degree()) {
            (Known::All, None) => SeriesDegree::Zero,
            (Known::All, Some(d)) => SeriesDegree::Exact(d),
            (Known::Through(n), d) => SeriesDegree::Masked { at_least: d, known_through: n },
        }
    }

    /// Form degrees present, ascending.
    pub fn form_degrees(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.terms.keys().map(|k| k.form.len()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn form_part(&self, m: usize) -> Self {
        self.filter(|k| k.form.len() == m)
    }

    /// The homogeneous component of grade `z`; exact whenever `z` is known.
    pub fn homogeneous(&self, z: u32) -> Result<Self> {
        self.known.require(z as i64)?;
        Ok(self.filter(|k| k.degree() == z).assume_exact())
    }

    /// `a[k, l]`: the part at `ħ^k` with exactly `l` fiber factors.
    pub fn grade_part(&self, k: u32, l: u32) -> Result<Self> {
        self.known.require((2 * k + l) as i64)?;
        Ok(self.filter(|key| key.hbar == k && key.fiber.len() == l).assume_exact())
    }

    pub fn filter(&self, keep: impl Fn(&TermKey) -> bool) -> Self {
        Self {
            dim: self.dim,
            terms: self.terms.iter().filter(|(k, _)| keep(k)).map(|(k, c)| (k.clone(), c.clone())).collect(),
            known: self.known,
        }
    }

    /// Applies `f` to every term; `f` returns replacement terms. The result's
    /// known bound is the input's shifted by `grade_shift`.
    pub(crate) fn map_terms(
        &self,
        grade_shift: i64,
        mut f: impl FnMut(&TermKey, &BasePolynomial, &mut dyn FnMut(TermKey, BasePolynomial)),
    ) -> Self {
        let mut out = Self { dim: self.dim, terms: BTreeMap::new(), known: self.known.shift(grade_shift) };
        for (k, c) in &self.terms {
            f(k, c, &mut |key, coeff| out.add_term(key, coeff));
        }
        out
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        self.map_terms(0, |k, p, emit| emit(k.clone(), p.scale(c)))
    }

    /// Multiply by `ħ^n`.
    pub fn mul_hbar(&self, n: u32) -> Self {
        self.map_terms(2 * n as i64, |k, p, emit| {
            emit(TermKey::new(k.hbar + n, k.fiber.clone(), k.form.clone()), p.clone())
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "series over different dimensions");
        let known = self.known.min(other.known);
        let mut out = self.clone().with_known(known);
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "series over different dimensions");
        let known = self.known.min(other.known);
        let mut out = self.clone().with_known(known);
        for (k, c) in &other.terms {
            out.add_term(k.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.map_terms(0, |k, p, emit| emit(k.clone(), -p))
    }

    /// Projection `σ`: set every `X` to zero.
    pub fn sigma(&self) -> Result<HbarPoly> {
        if let Some(k) = self.terms.keys().find(|k| !k.form.is_empty()) {
            return Err(Error::NonzeroFormDegree(k.form.len()));
        }
        let mut out = HbarPoly::zero(self.dim);
        for (k, c) in &self.terms {
            if k.fiber.is_one() {
                out.add_at(k.hbar, c);
            }
        }
        Ok(out)
    }

    /// Division by `iħ`; fails on any term without an `ħ` factor.
    pub fn div_ihbar(&self) -> Result<Self> {
        if let Some((k, c)) = self.terms.iter().find(|(k, _)| k.hbar == 0) {
            let t = WeylTerm { hbar: 0, fiber: k.fiber.clone(), form: k.form.clone(), coeff: c.clone() };
            return Err(Error::NotDivisibleByHbar(t.to_string()));
        }
        Ok(self.map_terms(-2, |k, p, emit| {
            emit(TermKey::new(k.hbar - 1, k.fiber.clone(), k.form.clone()), p.map_coeffs(|c| c.div_i()))
        }))
    }

    /// Lowest degree that could still be nonzero: the least stored grade, or
    /// the first unknown grade. `None` for an exact zero.
    fn low_degree(&self) -> Option<i64> {
        match (self.min_degree(), self.known) {
            (Some(d), _) => Some(d as i64),
            (None, Known::All) => None,
            (None, Known::Through(n)) => Some(n + 1),
        }
    }

    /// True when the two series agree on every grade both know.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let known = self.known.min(other.known);
        self.clone().with_known(known) == other.clone().with_known(known)
    }
}

impl fmt::Display for WeylSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (n, t) in self.to_terms().iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", t)?;
        }
        if let Known::Through(n) = self.known {
            write!(f, " + O(grade {})", n + 1)?;
        }
        Ok(())
    }
}

/// Rational coefficient, ħ-power gained, and resulting fiber monomial of one
/// contraction pattern in the ∘-product of two fiber monomials.
type Contraction = (u32, BigRational, FiberMonomial);

/// The fiberwise ∘-product for a constant Poisson tensor `ω^{ij}`:
///
/// `a ∘ b = Σ_t (1/t!) (iħ/2)^t ω^{i₁j₁}⋯ω^{i_tj_t} ∂^t a/∂X^{i…} ∂^t b/∂X^{j…}`,
///
/// with form parts concatenated left to right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylAlgebra {
    dim: usize,
    /// Nonzero entries of `ω^{ij}`.
    poisson: Vec<(usize, usize, BigRational)>,
}

impl WeylAlgebra {
    /// Darboux blocks on `(q^{2a-1}, q^{2a})` with `ω^{12} = +1`.
    pub fn standard(dim: usize) -> Self {
        assert!(dim > 0 && dim.is_multiple_of(2), "dimension must be even");
        let mut poisson = Vec::new();
        for a in 0..dim / 2 {
            poisson.push((2 * a, 2 * a + 1, BigRational::one()));
            poisson.push((2 * a + 1, 2 * a, -BigRational::one()));
        }
        Self { dim, poisson }
    }

    /// From the full matrix `ω^{ij}`.
    pub fn from_poisson(upper: &[Vec<BigRational>]) -> Self {
        let dim = upper.len();
        let mut poisson = Vec::new();
        for (i, row) in upper.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                if !w.is_zero() {
                    poisson.push((i, j, w.clone()));
                }
            }
        }
        Self { dim, poisson }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn poisson(&self, i: usize, j: usize) -> BigRational {
        self.poisson
            .iter()
            .find(|(a, b, _)| *a == i && *b == j)
            .map(|(_, _, w)| w.clone())
            .unwrap_or_else(BigRational::zero)
    }

    /// All contraction patterns of `X^α ∘ X^β`, with the `i^t` factor left
    /// out of the rational coefficient.
    fn contract(&self, alpha: &FiberMonomial, beta: &FiberMonomial) -> Vec<Contraction> {
        let mut states: Vec<(u32, BigRational, Vec<u32>, Vec<u32>)> =
            vec![(0, BigRational::one(), alpha.0.clone(), beta.0.clone())];
        for (i, j, w) in &self.poisson {
            let mut next = Vec::with_capacity(states.len());
            for (t, c, a, b) in states {
                let top = a[*i].min(b[*j]);
                let mut coeff = c.clone();
                for n in 0..=top {
                    if n > 0 {
                        // (w/2)^n/n! · a_i!/(a_i-n)! · b_j!/(b_j-n)!, built incrementally
                        let num = BigInt::from(a[*i] - n + 1) * BigInt::from(b[*j] - n + 1);
                        coeff = coeff * w * BigRational::new(num, BigInt::from(2 * n));
                    }
                    let mut a2 = a.clone();
                    let mut b2 = b.clone();
                    a2[*i] -= n;
                    b2[*j] -= n;
                    next.push((t + n, coeff.clone(), a2, b2));
                }
            }
            states = next;
        }
        let mut merged: BTreeMap<(u32, Vec<u32>), BigRational> = BTreeMap::new();
        for (t, c, a, b) in states {
            let fiber: Vec<u32> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            *merged.entry((t, fiber)).or_insert_with(BigRational::zero) += c;
        }
        merged.into_iter().filter(|(_, c)| !c.is_zero()).map(|((t, fiber), c)| (t, c, FiberMonomial(fiber))).collect()
    }

    /// Grade through which `a ∘ b` is determined by the known parts of the
    /// operands.
    fn product_known(a: &WeylSeries, b: &WeylSeries) -> Known {
        let from = |x: &WeylSeries, other: &WeylSeries| match (x.known, other.low_degree()) {
            (Known::Through(n), Some(low)) => Known::Through(n + low),
            _ => Known::All,
        };
        from(a, b).min(from(b, a))
    }

    fn raw_product(
        &self,
        a: &WeylSeries,
        b: &WeylSeries,
        limit: Known,
        graded_sign: bool,
        out: &mut WeylSeries,
        negate: bool,
    ) {
        let mut cache: HashMap<(&FiberMonomial, &FiberMonomial), Vec<Contraction>> = HashMap::new();
        for (ka, ca) in &a.terms {
            for (kb, cb) in &b.terms {
                if !limit.covers((ka.degree() + kb.degree()) as i64) {
                    continue;
                }
                let Some((form, wsign)) = ka.form.concat(&kb.form) else {
                    continue;
                };
                let mut sign = wsign as i32;
                if graded_sign && (ka.form.len() * kb.form.len()) % 2 == 1 {
                    sign = -sign;
                }
                if negate {
                    sign = -sign;
                }
                let poly = ca * cb;
                if poly.is_zero() {
                    continue;
                }
                let contractions =
                    cache.entry((&ka.fiber, &kb.fiber)).or_insert_with(|| self.contract(&ka.fiber, &kb.fiber));
                for (t, q, fiber) in contractions.iter() {
                    let mut c = GaussianRational::i_pow(*t).scale(q);
                    if sign < 0 {
                        c = -c;
                    }
                    out.add_term(TermKey::new(ka.hbar + kb.hbar + t, fiber.clone(), form.clone()), poly.scale(&c));
                }
            }
        }
    }

    fn result_bound(&self, a: &WeylSeries, b: &WeylSeries, cap: Option<u32>) -> Result<Known> {
        assert_eq!(a.dim, self.dim, "series dimension differs from the algebra");
        assert_eq!(b.dim, self.dim, "series dimension differs from the algebra");
        let valid = Self::product_known(a, b);
        match cap {
            None => Ok(valid),
            Some(c) => {
                valid.require(c as i64)?;
                Ok(Known::Through(c as i64))
            }
        }
    }

    /// Truncated ∘-product. With `cap = None` the result is computed as far as
    /// the operands determine it; with `Some(c)` through grade `c`, failing if
    /// the operands do not determine that grade.
    pub fn circ(&self, a: &WeylSeries, b: &WeylSeries, cap: Option<u32>) -> Result<WeylSeries> {
        let known = self.result_bound(a, b, cap)?;
        let mut out = WeylSeries { dim: self.dim, terms: BTreeMap::new(), known };
        self.raw_product(a, b, known, false, &mut out, false);
        Ok(out)
    }

    /// Graded commutator `[a, b] = a∘b − (−1)^{m₁m₂} b∘a`, applied per pair of
    /// form-degree blocks.
    pub fn commutator(&self, a: &WeylSeries, b: &WeylSeries, cap: Option<u32>) -> Result<WeylSeries> {
        let known = self.result_bound(a, b, cap)?;
        let mut out = WeylSeries { dim: self.dim, terms: BTreeMap::new(), known };
        self.raw_product(a, b, known, false, &mut out, false);
        self.raw_product(b, a, known, true, &mut out, true);
        Ok(out)
    }
}
