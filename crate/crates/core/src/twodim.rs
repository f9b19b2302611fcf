//! Closed forms on the 2D phase space: products of fiber monomials, the
//! coefficients `f` and `g`, the nonvanishing of `δ⁻¹F ∘ δ⁻¹F`, and the
//! elimination that forces every `b_{2k,l}` to zero.
//!
//! Coordinates are `(q, p) = (q1, q2)` with fiber variables `X¹, X²` and
//! `{q, p} = 1`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::algebra::{factorial, BasePolynomial, FiberMonomial, GaussianRational, WedgeWord};
use crate::calculus::delta_inv;
use crate::error::{Error, Result};
use crate::weyl::{TermKey, WeylAlgebra, WeylSeries, WeylTerm};

/// `f(r,j,s,k,t) = (1/2^t) r!j!s!k! Σ_a (−1)^a / (a!(t−a)!(r−t+a)!(j−a)!(s−a)!(k−t+a)!)`,
/// `a` from `max(t−r, t−k, 0)` to `min(j, s, t)`.
pub fn f_coeff(r: u32, j: u32, s: u32, k: u32, t: u32) -> Result<BigRational> {
    if t > r.min(k) + j.min(s) {
        return Err(Error::FCoeffRange { r, j, s, k, t });
    }
    let lo = t.saturating_sub(r).max(t.saturating_sub(k));
    let hi = j.min(s).min(t);
    let mut sum = BigRational::zero();
    for a in lo..=hi {
        let den = factorial(a)
            * factorial(t - a)
            * factorial(r + a - t)
            * factorial(j - a)
            * factorial(s - a)
            * factorial(k + a - t);
        let term = BigRational::new(BigInt::one(), den);
        if a % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let num = factorial(r) * factorial(j) * factorial(s) * factorial(k);
    let pow = BigInt::one() << t as usize;
    Ok(sum * BigRational::new(num, pow))
}

/// `(X¹)^r(X²)^j ∘ (X¹)^s(X²)^k = Σ_t (iħ)^t (X¹)^{r+s−t}(X²)^{k+j−t} f(r,j,s,k,t)`.
pub fn monomial_circ(r: u32, j: u32, s: u32, k: u32) -> WeylSeries {
    let mut out = WeylSeries::zero(2);
    for t in 0..=(r.min(k) + j.min(s)) {
        let f = f_coeff(r, j, s, k, t).expect("t within range");
        if f.is_zero() {
            continue;
        }
        let c = GaussianRational::real(f) * GaussianRational::i_pow(t);
        out = out.add(&WeylSeries::monomial(2, t, &[r + s - t, k + j - t], &[], c));
    }
    out
}

fn k_max(z: u32) -> u32 {
    (z - 1) / 4
}

/// The table `b_{2k,l}`, `0 ≤ k ≤ ⌊(z−1)/4⌋`, `0 ≤ l ≤ z−1−4k`, describing
/// the homogeneous 2-form
/// `F = Σ ħ^{2k} (z−4k+1) b_{2k,l} (X¹)^l (X²)^{z−1−4k−l} dq∧dp`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientTable {
    z: u32,
    entries: BTreeMap<(u32, u32), GaussianRational>,
}

impl CoefficientTable {
    pub fn zero(z: u32) -> Result<Self> {
        if z == 0 {
            return Err(Error::InvalidArgument("homogeneity degree z must be at least 1".into()));
        }
        Ok(Self { z, entries: BTreeMap::new() })
    }

    pub fn z(&self) -> u32 {
        self.z
    }

    /// All index pairs `(k, l)` of the table, in lexicographic order.
    pub fn indices(z: u32) -> Vec<(u32, u32)> {
        (0..=k_max(z)).flat_map(|k| (0..=(z - 1 - 4 * k)).map(move |l| (k, l))).collect()
    }

    fn check(&self, k: u32, l: u32) -> Result<()> {
        if k > k_max(self.z) || l > self.z - 1 - 4 * k {
            return Err(Error::InvalidArgument(format!("b[{},{}] outside the table for z = {}", 2 * k, l, self.z)));
        }
        Ok(())
    }

    /// Sets `b_{2k,l}`.
    pub fn set(&mut self, k: u32, l: u32, value: GaussianRational) -> Result<()> {
        self.check(k, l)?;
        if value.is_zero() {
            self.entries.remove(&(k, l));
        } else {
            self.entries.insert((k, l), value);
        }
        Ok(())
    }

    /// `b_{2k,l}`; zero outside the table.
    pub fn get(&self, k: u32, l: u32) -> GaussianRational {
        self.entries.get(&(k, l)).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries with small Gaussian-integer values; each entry is nonzero with
    /// probability `density`.
    pub fn random<R: Rng>(z: u32, density: f64, rng: &mut R) -> Result<Self> {
        let mut t = Self::zero(z)?;
        for (k, l) in Self::indices(z) {
            if rng.gen_bool(density) {
                let re = rng.gen_range(-3i64..=3);
                let im = rng.gen_range(-3i64..=3);
                t.set(k, l, GaussianRational::from_int(re) + GaussianRational::from_int(im).mul_i())?;
            }
        }
        Ok(t)
    }

    /// Reads the table back from a constant-coefficient 2-form of degree `z−1`.
    pub fn from_two_form(f: &WeylSeries) -> Result<Self> {
        let z = check_square_input(f)?.ok_or_else(|| Error::Precondition("zero form has no degree".into()))?;
        let mut t = Self::zero(z)?;
        for (key, c) in f.iter() {
            let value = c.as_constant().ok_or_else(|| Error::Precondition("coefficients must be constant".into()))?;
            let k = key.hbar / 2;
            let l = key.fiber.exps()[0];
            let scale = GaussianRational::from_int((z - 4 * k + 1) as i64);
            t.set(k, l, value / scale)?;
        }
        Ok(t)
    }

    pub fn to_two_form(&self) -> WeylSeries {
        let z = self.z;
        let mut out = WeylSeries::zero(2);
        for (&(k, l), b) in &self.entries {
            let a = b * &GaussianRational::from_int((z - 4 * k + 1) as i64);
            out = out.add(&WeylSeries::monomial(2, 2 * k, &[l, z - 1 - 4 * k - l], &[0, 1], a));
        }
        out
    }

    /// `δ⁻¹F = Σ ħ^{2k} b_{2k,l} ((X¹)^{l+1}(X²)^{z−1−4k−l} dp − (X¹)^l(X²)^{z−4k−l} dq)`.
    pub fn delta_inv_form(&self) -> WeylSeries {
        let z = self.z;
        let mut out = WeylSeries::zero(2);
        for (&(k, l), b) in &self.entries {
            out = out.add(&WeylSeries::monomial(2, 2 * k, &[l + 1, z - 1 - 4 * k - l], &[1], b.clone()));
            out = out.add(&WeylSeries::monomial(2, 2 * k, &[l, z - 4 * k - l], &[0], -b));
        }
        out
    }
}

/// One summand `factor · b_{2k,l} · b_{2w,r}` of `g_{2A+1,B}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GTerm {
    pub k: u32,
    pub l: u32,
    pub w: u32,
    pub r: u32,
    /// `2i(−1)^u f(l+1, z−1−4k−l, r, z−4w−r, 2u+1)` with `u = A−k−w`.
    pub factor: GaussianRational,
}

fn admissible(z: u32, a: u32, b: u32) -> Result<()> {
    if z == 0 || 4 * a + b + 2 > 2 * z {
        return Err(Error::InadmissibleGrade { z, a, b });
    }
    Ok(())
}

/// The summands of `g_{2A+1,B}`, enumerated over
///
/// ```text
/// 0 ≤ k ≤ min(A, K),  max(0, A+k−H) ≤ w ≤ min(K, A−k, k−A+H),
/// max(0, 2A+B−z−2k+2w+1) ≤ l ≤ min(z−1−4k, 2A+B−2k−2w)
/// ```
///
/// with `K = ⌊(z−1)/4⌋`, `H = ⌊(z−1)/2⌋`, keeping only triples for which
/// `r = 2A+B−2k−2w−l` lies in `0..=z−1−4w` and `f` has a nonzero range.
pub fn g_terms(z: u32, a: u32, b: u32) -> Result<Vec<GTerm>> {
    admissible(z, a, b)?;
    let (z, a, b) = (z as i64, a as i64, b as i64);
    let kk = (z - 1) / 4;
    let hh = (z - 1) / 2;
    let mut out = Vec::new();
    for k in 0..=a.min(kk) {
        let w_lo = 0.max(a + k - hh);
        let w_hi = kk.min(a - k).min(k - a + hh);
        for w in w_lo..=w_hi {
            let l_lo = 0.max(2 * a + b - z - 2 * k + 2 * w + 1);
            let l_hi = (z - 1 - 4 * k).min(2 * a + b - 2 * k - 2 * w);
            for l in l_lo..=l_hi {
                let r = 2 * a + b - 2 * k - 2 * w - l;
                let u = a - k - w;
                if r < 0 || r > z - 1 - 4 * w {
                    continue;
                }
                if let Some(term) = g_term(z, k, l, w, r, u)? {
                    out.push(term);
                }
            }
        }
    }
    Ok(out)
}

/// The same summands found by scanning every `(k, l, w, r)` of the two
/// tables directly.
pub fn g_terms_exhaustive(z: u32, a: u32, b: u32) -> Result<Vec<GTerm>> {
    admissible(z, a, b)?;
    let mut out = Vec::new();
    for (k, l) in CoefficientTable::indices(z) {
        for (w, r) in CoefficientTable::indices(z) {
            let u = a as i64 - k as i64 - w as i64;
            if u < 0 || l as i64 + r as i64 - 2 * u != b as i64 {
                continue;
            }
            if let Some(term) = g_term(z as i64, k as i64, l as i64, w as i64, r as i64, u)? {
                out.push(term);
            }
        }
    }
    Ok(out)
}

fn g_term(z: i64, k: i64, l: i64, w: i64, r: i64, u: i64) -> Result<Option<GTerm>> {
    let (fr, fj, fs, fk) = (l + 1, z - 1 - 4 * k - l, r, z - 4 * w - r);
    let t = 2 * u + 1;
    if t > fr.min(fk) + fj.min(fs) {
        return Ok(None);
    }
    let f = f_coeff(fr as u32, fj as u32, fs as u32, fk as u32, t as u32)?;
    if f.is_zero() {
        return Ok(None);
    }
    let sign = if u % 2 == 0 { 2 } else { -2 };
    let factor = GaussianRational::real(f * BigRational::from_integer(sign.into())).mul_i();
    Ok(Some(GTerm { k: k as u32, l: l as u32, w: w as u32, r: r as u32, factor }))
}

/// `g_{2A+1,B}`, the coefficient of `ħ^{2A+1}(X¹)^B(X²)^{2z−4A−B−2} dq∧dp`
/// in `δ⁻¹F ∘ δ⁻¹F`.
pub fn g_coeff(table: &CoefficientTable, a: u32, b: u32) -> Result<GaussianRational> {
    Ok(g_terms(table.z, a, b)?.iter().map(|t| &(&t.factor * &table.get(t.k, t.l)) * &table.get(t.w, t.r)).sum())
}

/// Checks that `f` is a nonzero-or-zero 2D 2-form homogeneous of one degree
/// with even powers of ħ; returns `z` (one more than the degree) if nonzero.
fn check_square_input(f: &WeylSeries) -> Result<Option<u32>> {
    if f.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: f.dim() });
    }
    let dqdp = WedgeWord::from_sorted(&[0, 1]).expect("sorted");
    let mut degree = None;
    for (key, _) in f.iter() {
        if key.form != dqdp {
            return Err(Error::Precondition(format!("term {} is not a multiple of dq1^dq2", key.form)));
        }
        if key.hbar % 2 != 0 {
            return Err(Error::Precondition(format!("odd power hbar^{}", key.hbar)));
        }
        match degree {
            None => degree = Some(key.degree()),
            Some(d) if d != key.degree() => {
                return Err(Error::Precondition(format!("mixed degrees {} and {}", d, key.degree())))
            }
            _ => {}
        }
    }
    Ok(degree.map(|d| d + 1))
}

/// Result of [`square_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareCheck {
    pub square: WeylSeries,
    /// A nonzero term of the square, if any.
    pub witness: Option<WeylTerm>,
}

impl SquareCheck {
    pub fn is_zero(&self) -> bool {
        self.witness.is_none()
    }
}

/// Computes `δ⁻¹F ∘ δ⁻¹F` for a homogeneous 2D 2-form `F` with even ħ-powers.
pub fn square_check(f: &WeylSeries) -> Result<SquareCheck> {
    check_square_input(f)?;
    let g = delta_inv(f);
    let square = WeylAlgebra::standard(2).circ(&g, &g, None)?;
    let witness = square.to_terms().into_iter().next();
    Ok(SquareCheck { square, witness })
}

/// The coefficient of `ħ^{2A+1}(X¹)^B(X²)^{2z−4A−B−2} dq∧dp` in a square,
/// read off directly.
pub fn square_coefficient(square: &WeylSeries, z: u32, a: u32, b: u32) -> Result<BasePolynomial> {
    admissible(z, a, b)?;
    let key = TermKey::new(
        2 * a + 1,
        FiberMonomial(vec![b, 2 * z - 4 * a - b - 2]),
        WedgeWord::from_sorted(&[0, 1]).expect("sorted"),
    );
    Ok(square.coeff(&key))
}

/// One elimination: the equation `g_{2A+1,B} = 0` reduced to
/// `factor · b_{2k,l}² = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CascadeStep {
    pub a: u32,
    pub b: u32,
    /// `(2k, l)` of the eliminated `b_{2k,l}`.
    pub var: (u32, u32),
    pub factor: GaussianRational,
    /// Equations found identically satisfied just before this step.
    pub satisfied: Vec<(u32, u32)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CascadeTranscript {
    pub z: u32,
    pub steps: Vec<CascadeStep>,
    /// Equations left identically satisfied after the last elimination.
    pub trailing: Vec<(u32, u32)>,
}

impl CascadeTranscript {
    pub fn eliminated(&self) -> Vec<(u32, u32)> {
        self.steps.iter().map(|s| s.var).collect()
    }
}

impl fmt::Display for CascadeTranscript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "z = {}: {} unknowns b[2k,l]", self.z, self.steps.len())?;
        for s in &self.steps {
            if !s.satisfied.is_empty() {
                let list: Vec<String> = s.satisfied.iter().map(|(a, b)| format!("({a},{b})")).collect();
                writeln!(f, "  satisfied: {}", list.join(" "))?;
            }
            writeln!(
                f,
                "  (A,B) = ({},{}): ({}) * b[{},{}]^2 = 0  =>  b[{},{}] = 0",
                s.a, s.b, s.factor, s.var.0, s.var.1, s.var.0, s.var.1
            )?;
        }
        if !self.trailing.is_empty() {
            let list: Vec<String> = self.trailing.iter().map(|(a, b)| format!("({a},{b})")).collect();
            writeln!(f, "  satisfied: {}", list.join(" "))?;
        }
        write!(f, "all b = 0")
    }
}

type Var = (u32, u32);
type QuadraticForm = BTreeMap<(Var, Var), GaussianRational>;

/// A quadratic form in the unknowns `b_{2k,l}`, keyed by ordered pairs.
fn quadratic_form(z: u32, a: u32, b: u32) -> Result<BTreeMap<(Var, Var), GaussianRational>> {
    let mut form: BTreeMap<(Var, Var), GaussianRational> = BTreeMap::new();
    for t in g_terms(z, a, b)? {
        let (x, y) = ((t.k, t.l), (t.w, t.r));
        let key = if x <= y { (x, y) } else { (y, x) };
        *form.entry(key).or_insert_with(GaussianRational::zero) += &t.factor;
    }
    form.retain(|_, c| !c.is_zero());
    Ok(form)
}

/// Solves `g_{2A+1,B} = 0` for all admissible `(A,B)` with the `b_{2k,l}`
/// as unknowns. Repeatedly takes the first equation, in `(A,B)` order, that
/// after the eliminations so far reads `c · b² = 0`, and sets that `b` to
/// zero. Each pivot factor is recomputed from `f` and must be nonzero.
pub fn cascade_solve(z: u32) -> Result<CascadeTranscript> {
    if z == 0 {
        return Err(Error::InvalidArgument("homogeneity degree z must be at least 1".into()));
    }
    let mut pending: Vec<((u32, u32), QuadraticForm)> = Vec::new();
    for a in 0..=((2 * z - 2) / 4) {
        for b in 0..=(2 * z - 2 - 4 * a) {
            pending.push(((a, b), quadratic_form(z, a, b)?));
        }
    }
    let mut remaining: Vec<Var> = CoefficientTable::indices(z);
    let mut steps = Vec::new();
    let mut satisfied = Vec::new();
    while !remaining.is_empty() {
        let mut pivot = None;
        let mut idx = 0;
        while idx < pending.len() {
            let form = &pending[idx].1;
            if form.is_empty() {
                satisfied.push(pending.remove(idx).0);
                continue;
            }
            if form.len() == 1 {
                let (&(x, y), c) = form.iter().next().expect("one entry");
                if x == y {
                    pivot = Some((idx, x, c.clone()));
                    break;
                }
            }
            idx += 1;
        }
        let Some((idx, var, factor)) = pivot else {
            return Err(Error::CascadeStuck { remaining: remaining.len() });
        };
        let ((a, b), _) = pending.remove(idx);
        let (k, l) = var;
        let u = a - 2 * k;
        let direct = f_coeff(l + 1, z - 1 - 4 * k - l, l, z - 4 * k - l, 2 * u + 1)?;
        let sign = if u % 2 == 0 { 2 } else { -2 };
        let expected = GaussianRational::real(direct * BigRational::from_integer(sign.into())).mul_i();
        if expected.is_zero() {
            return Err(Error::ZeroPivot { a, b, var: (2 * k, l) });
        }
        debug_assert_eq!(expected, factor);
        remaining.retain(|v| *v != var);
        for (_, form) in pending.iter_mut() {
            form.retain(|(x, y), _| *x != var && *y != var);
        }
        steps.push(CascadeStep { a, b, var: (2 * k, l), factor, satisfied: std::mem::take(&mut satisfied) });
    }
    let mut trailing = satisfied;
    for ((a, b), form) in pending {
        debug_assert!(form.is_empty());
        trailing.push((a, b));
    }
    trailing.sort();
    Ok(CascadeTranscript { z, steps, trailing })
}
