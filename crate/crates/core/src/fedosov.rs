//! The Abelian connection correction `r`, its verification, the finiteness
//! criterion, flat sections, and the star product.

use std::collections::BTreeMap;
use std::collections::HashMap;

use crate::algebra::BasePolynomial;
use crate::calculus::{central_symplectic_form, covariant_d, delta, delta_inv, ext_d};
use crate::error::{Error, Result};
use crate::geometry::{curvature_form, gamma_form, validate, ConnectionSpec, CurvatureRoute, ManifoldSpec};
use crate::weyl::{HbarPoly, TermKey, WeylAlgebra, WeylSeries};

/// A validated Fedosov manifold with its derived forms precomputed.
#[derive(Clone, Debug)]
pub struct FedosovManifold {
    manifold: ManifoldSpec,
    connection: ConnectionSpec,
    algebra: WeylAlgebra,
    gamma: WeylSeries,
    curvature: WeylSeries,
}

impl FedosovManifold {
    pub fn new(manifold: ManifoldSpec, connection: ConnectionSpec) -> Result<Self> {
        validate(&manifold, &connection)?;
        let algebra = manifold.algebra();
        let gamma = gamma_form(&manifold, &connection);
        let curvature = curvature_form(&manifold, &connection, CurvatureRoute::FormEquation)?;
        Ok(Self { manifold, connection, algebra, gamma, curvature })
    }

    pub fn manifold(&self) -> &ManifoldSpec {
        &self.manifold
    }

    pub fn connection(&self) -> &ConnectionSpec {
        &self.connection
    }

    pub fn algebra(&self) -> &WeylAlgebra {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.manifold.dim()
    }

    /// `Γ = ½ Γ_{ijk} X^iX^j dq^k`.
    pub fn gamma(&self) -> &WeylSeries {
        &self.gamma
    }

    /// `R_Γ = dΓ + (1/iħ) Γ∘Γ`.
    pub fn curvature(&self) -> &WeylSeries {
        &self.curvature
    }

    /// `∂_Γ a = da + (1/iħ)[Γ, a]`.
    pub fn covariant_d(&self, a: &WeylSeries) -> Result<WeylSeries> {
        covariant_d(&self.algebra, &self.gamma, a)
    }

    /// `(1/iħ)[a, b]` with X-free parts of `b` dropped first: they are
    /// central, and dropping them keeps the known bound tight.
    fn bracket_over_ihbar(&self, a: &WeylSeries, b: &WeylSeries) -> Result<WeylSeries> {
        let b = b.filter(|k| !k.fiber.is_one());
        self.algebra.commutator(a, &b, None)?.div_ihbar()
    }
}

/// The correction `r = Σ_{z≥3} r[z]`, each `r[z]` a homogeneous 1-form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianCorrection {
    dim: usize,
    grades: BTreeMap<u32, WeylSeries>,
    known_through: u32,
}

impl AbelianCorrection {
    pub fn known_through(&self) -> u32 {
        self.known_through
    }

    /// `r[z]`; zero below grade 3.
    pub fn grade(&self, z: u32) -> Result<WeylSeries> {
        if z > self.known_through {
            return Err(Error::InsufficientPrecision { requested: z as i64, available: self.known_through as i64 });
        }
        Ok(self.grades.get(&z).cloned().unwrap_or_else(|| WeylSeries::zero(self.dim)))
    }

    pub fn grades(&self) -> impl Iterator<Item = (u32, &WeylSeries)> {
        self.grades.iter().map(|(&z, s)| (z, s))
    }

    /// The sum of all known grades, marked as known through the bound.
    pub fn as_series(&self) -> WeylSeries {
        let mut out = WeylSeries::zero_through(self.dim, self.known_through as i64);
        for s in self.grades.values() {
            out = out.add(s);
        }
        out
    }

    /// Grades `3 ≤ z ≤ N` with `r[z] ≠ 0`.
    pub fn nonzero_grades(&self) -> Vec<u32> {
        self.grades.iter().filter(|(_, s)| !s.is_zero()).map(|(&z, _)| z).collect()
    }

    /// Replace one grade; intended for building perturbed corrections.
    pub fn with_grade(mut self, z: u32, s: WeylSeries) -> Self {
        self.grades.insert(z, s);
        self
    }

    fn from_series(s: &WeylSeries, known_through: u32) -> Self {
        let mut grades = BTreeMap::new();
        for z in 3..=known_through {
            grades.insert(z, s.homogeneous(z).expect("grade within bound"));
        }
        Self { dim: s.dim(), grades, known_through }
    }
}

/// `r[3] = δ⁻¹R_Γ`, then
/// `r[z] = δ⁻¹(∂_Γ r[z−1] + (1/iħ) Σ_{j=3}^{z−2} r[j]∘r[z+1−j])` for `4 ≤ z ≤ N`.
pub fn abelian_r(fm: &FedosovManifold, n: u32) -> Result<AbelianCorrection> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("correction starts at grade 3, got N = {n}")));
    }
    let mut grades: BTreeMap<u32, WeylSeries> = BTreeMap::new();
    grades.insert(3, delta_inv(fm.curvature()));
    for z in 4..=n {
        let f = next_source(fm, &grades, z)?;
        grades.insert(z, delta_inv(&f));
    }
    Ok(AbelianCorrection { dim: fm.dim(), grades, known_through: n })
}

/// The 2-form `F[z−1] = ∂_Γ r[z−1] + (1/iħ) Σ_{j=3}^{z−2} r[j]∘r[z+1−j]`.
fn next_source(fm: &FedosovManifold, grades: &BTreeMap<u32, WeylSeries>, z: u32) -> Result<WeylSeries> {
    let mut f = fm.covariant_d(&grades[&(z - 1)])?;
    let mut conv = WeylSeries::zero(fm.dim());
    for j in 3..=z.saturating_sub(2) {
        let k = z + 1 - j;
        conv = conv.add(&fm.algebra().circ(&grades[&j], &grades[&k], None)?);
    }
    if !conv.is_zero() {
        f = f.add(&conv.div_ihbar()?);
    }
    Ok(f)
}

/// Fixed-point iteration `r_s = δ⁻¹(R_Γ + ∂_Γ r_{s−1} + (1/iħ) r_{s−1}∘r_{s−1})`
/// from `r_0 = 0`, truncated at grade `N`.
pub fn abelian_r_iterative(fm: &FedosovManifold, steps: u32, n: u32) -> Result<AbelianCorrection> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("correction starts at grade 3, got N = {n}")));
    }
    if steps < n {
        return Err(Error::InvalidArgument(format!("{steps} steps cannot stabilize grade {n}")));
    }
    let mut r = WeylSeries::zero_through(fm.dim(), n as i64);
    for _ in 0..steps {
        let sq = fm.algebra().circ(&r, &r, None)?;
        let rhs = fm.curvature().add(&fm.covariant_d(&r)?).add(&sq.div_ihbar()?);
        r = delta_inv(&rhs).truncate(n as i64);
    }
    Ok(AbelianCorrection::from_series(&r, n))
}

/// Outcome of [`check_abelian`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianCheck {
    /// First grade `g ≤ N−1` where `δr − R_Γ − ∂_Γr − (1/iħ) r∘r` is nonzero,
    /// with that residual.
    pub first_failure: Option<(u32, WeylSeries)>,
    /// Curvature of `ω_{ij}X^i dq^j + Γ + r` equals `−½ω_{ij}dq^i∧dq^j`
    /// through grade `N−1`.
    pub curvature_central: bool,
    /// `δ⁻¹r = 0`.
    pub normalized: bool,
    /// Every term carries an even power of `ħ`.
    pub even_hbar: bool,
    /// Every term has at least one fiber factor.
    pub fiber_nonempty: bool,
    /// `r[3] = δ⁻¹R_Γ`.
    pub seed_matches: bool,
}

impl AbelianCheck {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
            && self.curvature_central
            && self.normalized
            && self.even_hbar
            && self.fiber_nonempty
            && self.seed_matches
    }
}

pub fn check_abelian(fm: &FedosovManifold, r: &AbelianCorrection, n: u32) -> Result<AbelianCheck> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("correction starts at grade 3, got N = {n}")));
    }
    if r.known_through < n {
        return Err(Error::InsufficientPrecision { requested: n as i64, available: r.known_through as i64 });
    }
    let alg = fm.algebra();
    let mut first_failure = None;
    for g in 2..n {
        let mut residual = delta(&r.grade(g + 1)?);
        if g == 2 {
            residual = residual.sub(fm.curvature());
        }
        residual = residual.sub(&fm.covariant_d(&r.grade(g)?)?);
        let mut conv = WeylSeries::zero(fm.dim());
        for j in 3..g {
            let k = g + 2 - j;
            if k >= 3 {
                conv = conv.add(&alg.circ(&r.grade(j)?, &r.grade(k)?, None)?);
            }
        }
        if !conv.is_zero() {
            residual = residual.sub(&conv.div_ihbar()?);
        }
        if !residual.is_zero() {
            first_failure = Some((g, residual));
            break;
        }
    }

    // curvature of the full Abelian connection, through grade N−1
    let omega = fm.manifold().omega_lower();
    let dim = fm.dim();
    let mut omega_x_dq = WeylSeries::zero(dim);
    for i in 0..dim {
        for j in 0..dim {
            if !num_traits::Zero::is_zero(&omega[i][j]) {
                let mut fiber = vec![0; dim];
                fiber[i] = 1;
                omega_x_dq = omega_x_dq.add(&WeylSeries::monomial(
                    dim,
                    0,
                    &fiber,
                    &[j],
                    crate::algebra::GaussianRational::real(omega[i][j].clone()),
                ));
            }
        }
    }
    let truncated = r.as_series().truncate(n as i64);
    let full = omega_x_dq.add(fm.gamma()).add(&truncated);
    let curv = ext_d(&full).add(&alg.circ(&full, &full, None)?.div_ihbar()?).truncate(n as i64 - 1);
    let central = central_symplectic_form(omega).truncate(n as i64 - 1);
    let curvature_central = curv == central;

    let mut normalized = true;
    let mut even_hbar = true;
    let mut fiber_nonempty = true;
    for z in 3..=n {
        let s = r.grade(z)?;
        normalized &= delta_inv(&s).is_zero();
        for (k, _) in s.iter() {
            even_hbar &= k.hbar % 2 == 0;
            fiber_nonempty &= !k.fiber.is_one();
        }
    }
    let seed_matches = r.grade(3)? == delta_inv(fm.curvature());
    Ok(AbelianCheck { first_failure, curvature_central, normalized, even_hbar, fiber_nonempty, seed_matches })
}

/// One equation of the finiteness system for a given `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitenessEquation {
    /// 1-based position in the system.
    pub index: usize,
    pub label: String,
    pub residual: WeylSeries,
}

impl FinitenessEquation {
    pub fn holds(&self) -> bool {
        self.residual.is_zero()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FinitenessVerdict {
    /// Every equation holds: `r[z] = 0` for all `z ≥ m`.
    FiniteConsistent,
    /// Some equation fails; `first` is the lowest failing index.
    Violated { first: usize, violated: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitenessReport {
    pub m: u32,
    pub equations: Vec<FinitenessEquation>,
    pub verdict: FinitenessVerdict,
}

/// Evaluates, for `r[3] … r[m−1]`, the system
///
/// ```text
/// ∂_Γ r[m−1] + (1/iħ) Σ_{j=3}^{m−2} r[j]∘r[m+1−j] = 0
/// Σ_j r[j]∘r[p−j] = 0            for p = m+2 … 2m−2, 3 ≤ j, p−j ≤ m−1
/// ```
///
/// whose last member is `r[m−1]∘r[m−1] = 0`.
pub fn finiteness_test(fm: &FedosovManifold, r: &AbelianCorrection, m: u32) -> Result<FinitenessReport> {
    if m < 4 {
        return Err(Error::InvalidArgument(format!("finiteness test needs m ≥ 4, got {m}")));
    }
    if r.known_through + 1 < m {
        return Err(Error::InsufficientPrecision { requested: m as i64 - 1, available: r.known_through as i64 });
    }
    let alg = fm.algebra();
    let mut equations = Vec::new();

    let mut first = fm.covariant_d(&r.grade(m - 1)?)?;
    let mut conv = WeylSeries::zero(fm.dim());
    for j in 3..=(m - 2) {
        let k = m + 1 - j;
        if (3..m).contains(&k) {
            conv = conv.add(&alg.circ(&r.grade(j)?, &r.grade(k)?, None)?);
        }
    }
    if !conv.is_zero() {
        first = first.add(&conv.div_ihbar()?);
    }
    equations.push(FinitenessEquation {
        index: 1,
        label: if m == 4 {
            "dG r[3]".to_string()
        } else {
            format!("dG r[{}] + (1/ih) sum_j r[j] o r[{}-j]", m - 1, m + 1)
        },
        residual: first,
    });

    for p in (m + 2)..=(2 * m - 2) {
        let mut sum = WeylSeries::zero(fm.dim());
        for j in 3..m {
            let k = p - j;
            if (3..m).contains(&k) {
                sum = sum.add(&alg.circ(&r.grade(j)?, &r.grade(k)?, None)?);
            }
        }
        let label = if p == 2 * m - 2 { format!("r[{0}] o r[{0}]", m - 1) } else { format!("sum_j r[j] o r[{}-j]", p) };
        equations.push(FinitenessEquation { index: equations.len() + 1, label, residual: sum });
    }

    let violated: Vec<usize> = equations.iter().filter(|e| !e.holds()).map(|e| e.index).collect();
    let verdict = match violated.first() {
        None => FinitenessVerdict::FiniteConsistent,
        Some(&first) => FinitenessVerdict::Violated { first, violated },
    };
    Ok(FinitenessReport { m, equations, verdict })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CommutingDegree {
    /// `R_Γ = 0`, so `r = 0`.
    Flat,
    /// `(∂_Γ δ⁻¹)^{z−3} R_Γ = 0` first at `minimal_z`; `deg(r) = minimal_z − 1`.
    Finite {
        minimal_z: u32,
        degree: u32,
    },
    NotFiniteWithin(u32),
}

/// For connections whose correction has vanishing pairwise products
/// `r[j]∘r[k]`, finds the least `z ≥ 4` with `(∂_Γ δ⁻¹)^{z−3} R_Γ = 0`.
/// The product hypothesis is checked on every grade through `z_max`.
pub fn commuting_case_degree(fm: &FedosovManifold, z_max: u32) -> Result<CommutingDegree> {
    if z_max < 4 {
        return Err(Error::InvalidArgument(format!("z_max must be at least 4, got {z_max}")));
    }
    if fm.curvature().is_zero() {
        return Ok(CommutingDegree::Flat);
    }
    let r = abelian_r(fm, z_max)?;
    for j in 3..=z_max {
        for k in j..=z_max {
            let a = r.grade(j)?;
            let b = r.grade(k)?;
            if !fm.algebra().circ(&a, &b, None)?.is_zero() || !fm.algebra().circ(&b, &a, None)?.is_zero() {
                return Err(Error::CommutingHypothesis(j, k));
            }
        }
    }
    let mut t = fm.curvature().clone();
    for z in 4..=z_max {
        t = fm.covariant_d(&delta_inv(&t))?;
        if t.is_zero() {
            return Ok(CommutingDegree::Finite { minimal_z: z, degree: z - 1 });
        }
    }
    Ok(CommutingDegree::NotFiniteWithin(z_max))
}

/// The flat section `a` with `σ(a) = a₀`, grade by grade.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatSection {
    a0: BasePolynomial,
    grades: Vec<WeylSeries>,
}

impl FlatSection {
    pub fn base(&self) -> &BasePolynomial {
        &self.a0
    }

    pub fn known_through(&self) -> u32 {
        self.grades.len() as u32 - 1
    }

    pub fn grade(&self, z: u32) -> Option<&WeylSeries> {
        self.grades.get(z as usize)
    }

    pub fn as_series(&self) -> WeylSeries {
        let dim = self.a0.nvars();
        let mut out = WeylSeries::zero_through(dim, self.known_through() as i64);
        for g in &self.grades {
            out = out.add(g);
        }
        out
    }
}

/// Solves `a = a₀ + δ⁻¹(∂_Γ a + (1/iħ)[r, a])` through grade `N`. Grade `z`
/// depends only on grades below it, so one sweep per grade suffices.
pub fn flat_section(fm: &FedosovManifold, r: &AbelianCorrection, a0: &BasePolynomial, n: u32) -> Result<FlatSection> {
    if a0.nvars() != fm.dim() {
        return Err(Error::DimensionMismatch { expected: fm.dim(), found: a0.nvars() });
    }
    if n >= 3 && r.known_through < n {
        return Err(Error::InsufficientPrecision { requested: n as i64, available: r.known_through as i64 });
    }
    let mut grades = vec![WeylSeries::function(a0.clone())];
    for z in 1..=n {
        let mut g = fm.covariant_d(&grades[z as usize - 1])?;
        for w in 1..z.saturating_sub(1) {
            let j = z + 1 - w;
            let bracket = fm.algebra().commutator(&r.grade(j)?, &grades[w as usize], None)?;
            if !bracket.is_zero() {
                g = g.add(&bracket.div_ihbar()?);
            }
        }
        grades.push(delta_inv(&g));
    }
    Ok(FlatSection { a0: a0.clone(), grades })
}

/// The same fixed point reached by plain iteration on truncated series,
/// `sweeps` times from `a = a₀`.
pub fn flat_section_fixed_point(
    fm: &FedosovManifold,
    r: &AbelianCorrection,
    a0: &BasePolynomial,
    n: u32,
    sweeps: u32,
) -> Result<WeylSeries> {
    let base = WeylSeries::function(a0.clone());
    let rs = r.as_series();
    let mut a = base.truncate(n as i64);
    for _ in 0..sweeps {
        let rhs = fm.covariant_d(&a)?.add(&fm.bracket_over_ihbar(&rs, &a)?);
        a = base.add(&delta_inv(&rhs)).truncate(n as i64);
    }
    Ok(a)
}

/// `∂_Γ̃ a = −δa + ∂_Γ a + (1/iħ)[r, a]`, through the grade the inputs fix.
pub fn flatness_residual(fm: &FedosovManifold, r: &AbelianCorrection, section: &FlatSection) -> Result<WeylSeries> {
    let a = section.as_series();
    let rs = r.as_series();
    let res = fm.covariant_d(&a)?.sub(&delta(&a)).add(&fm.bracket_over_ihbar(&rs, &a)?);
    Ok(res)
}

/// Star products through a fixed order in `ħ`, reusing one correction `r`.
#[derive(Clone, Debug)]
pub struct StarProduct {
    fm: FedosovManifold,
    r: AbelianCorrection,
    order: u32,
}

impl StarProduct {
    /// Prepares products exact through `ħ^order`: sections and `r` are needed
    /// through grade `2·order`.
    pub fn new(fm: FedosovManifold, order: u32) -> Result<Self> {
        let r = abelian_r(&fm, (2 * order).max(3))?;
        Ok(Self { fm, r, order })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn manifold(&self) -> &FedosovManifold {
        &self.fm
    }

    pub fn correction(&self) -> &AbelianCorrection {
        &self.r
    }

    pub fn lift(&self, a0: &BasePolynomial, n: u32) -> Result<FlatSection> {
        flat_section(&self.fm, &self.r, a0, n)
    }

    /// `a₀ * b₀ = σ(σ⁻¹(a₀) ∘ σ⁻¹(b₀))` through `ħ^order`.
    pub fn star(&self, a0: &BasePolynomial, b0: &BasePolynomial) -> Result<HbarPoly> {
        self.star_series(&HbarPoly::from_poly(a0.clone()), &HbarPoly::from_poly(b0.clone()))
    }

    /// The ħ-bilinear extension to ħ-dependent observables.
    pub fn star_series(&self, a: &HbarPoly, b: &HbarPoly) -> Result<HbarPoly> {
        let k_max = self.order;
        let mut lifts: HashMap<&BasePolynomial, FlatSection> = HashMap::new();
        for (_, p) in a.iter().chain(b.iter()) {
            if !lifts.contains_key(p) {
                lifts.insert(p, self.lift(p, 2 * k_max)?);
            }
        }
        let mut out = HbarPoly::zero(self.fm.dim());
        for (i, f) in a.iter() {
            for (j, g) in b.iter() {
                if i + j > k_max {
                    continue;
                }
                let cap = 2 * (k_max - i - j);
                let fa = lifts[f].as_series().truncate(cap as i64);
                let gb = lifts[g].as_series().truncate(cap as i64);
                let prod = self.fm.algebra().circ(&fa, &gb, Some(cap))?;
                let x_free = prod.filter(|k: &TermKey| k.fiber.is_one());
                for (k, p) in x_free.sigma()?.iter() {
                    out.add_at(k + i + j, p);
                }
            }
        }
        Ok(out)
    }
}

/// One-shot star product of two polynomial observables through `ħ^k`.
pub fn star(fm: &FedosovManifold, a0: &BasePolynomial, b0: &BasePolynomial, k: u32) -> Result<HbarPoly> {
    StarProduct::new(fm.clone(), k)?.star(a0, b0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::GaussianRational;
    use crate::weyl::Known;

    fn q(dim: usize, k: usize) -> BasePolynomial {
        BasePolynomial::var(dim, k).unwrap()
    }

    fn one(dim: usize) -> BasePolynomial {
        BasePolynomial::one(dim)
    }

    fn flat2d() -> FedosovManifold {
        FedosovManifold::new(ManifoldSpec::standard(2).unwrap(), ConnectionSpec::flat(2)).unwrap()
    }

    fn curved2d() -> FedosovManifold {
        let c = ConnectionSpec::flat(2).with(0, 0, 0, one(2)).unwrap().with(1, 1, 1, one(2)).unwrap();
        FedosovManifold::new(ManifoldSpec::standard(2).unwrap(), c).unwrap()
    }

    fn commuting4d() -> FedosovManifold {
        let c = ConnectionSpec::flat(4).with(0, 0, 0, q(4, 2)).unwrap();
        FedosovManifold::new(ManifoldSpec::standard(4).unwrap(), c).unwrap()
    }

    #[test]
    fn flat_chart_has_zero_correction() {
        let r = abelian_r(&flat2d(), 6).unwrap();
        assert!(r.nonzero_grades().is_empty());
        assert!(check_abelian(&flat2d(), &r, 6).unwrap().passed());
    }

    #[test]
    fn rejects_low_order() {
        assert!(matches!(abelian_r(&flat2d(), 2), Err(Error::InvalidArgument(_))));
        assert!(matches!(abelian_r_iterative(&flat2d(), 3, 5), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn curved_correction_passes_all_checks() {
        let fm = curved2d();
        let r = abelian_r(&fm, 6).unwrap();
        assert!(!r.grade(3).unwrap().is_zero());
        let report = check_abelian(&fm, &r, 6).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn recursion_and_iteration_agree() {
        let fm = curved2d();
        let a = abelian_r(&fm, 6).unwrap();
        let b = abelian_r_iterative(&fm, 6, 6).unwrap();
        for z in 3..=6 {
            assert_eq!(a.grade(z).unwrap(), b.grade(z).unwrap(), "grade {z}");
        }
    }

    #[test]
    fn perturbed_correction_reports_grade() {
        let fm = curved2d();
        let r = abelian_r(&fm, 5).unwrap().with_grade(3, WeylSeries::zero(2));
        let report = check_abelian(&fm, &r, 5).unwrap();
        let (g, residual) = report.first_failure.expect("must fail");
        assert_eq!(g, 2);
        assert_eq!(residual, fm.curvature().neg());
        assert!(!report.curvature_central);
    }

    #[test]
    fn curved_2d_fails_finiteness() {
        let fm = curved2d();
        let r = abelian_r(&fm, 5).unwrap();
        for m in 4..=6 {
            let report = finiteness_test(&fm, &r, m).unwrap();
            assert!(matches!(report.verdict, FinitenessVerdict::Violated { .. }), "m = {m}");
            assert_eq!(report.equations.len(), m as usize - 2);
        }
    }

    #[test]
    fn commuting_fixture_terminates() {
        let fm = commuting4d();
        assert_eq!(commuting_case_degree(&fm, 8).unwrap(), CommutingDegree::Finite { minimal_z: 4, degree: 3 });
        let r = abelian_r(&fm, 8).unwrap();
        assert_eq!(r.nonzero_grades(), vec![3]);
        let report = finiteness_test(&fm, &r, 4).unwrap();
        assert_eq!(report.verdict, FinitenessVerdict::FiniteConsistent);
        assert_eq!(commuting_case_degree(&flat2d(), 6).unwrap(), CommutingDegree::Flat);
    }

    #[test]
    fn commuting_hypothesis_is_checked() {
        assert!(matches!(commuting_case_degree(&curved2d(), 6), Err(Error::CommutingHypothesis(_, _))));
    }

    #[test]
    fn flat_chart_sections_and_moyal() {
        let fm = flat2d();
        let sp = StarProduct::new(fm.clone(), 2).unwrap();
        let s = sp.lift(&q(2, 0), 4).unwrap();
        let expected = WeylSeries::function(q(2, 0)).add(&WeylSeries::x(2, 0));
        assert_eq!(s.as_series().assume_exact(), expected);

        let p = sp.star(&q(2, 0), &q(2, 1)).unwrap();
        let mut want = HbarPoly::from_poly(&q(2, 0) * &q(2, 1));
        want.add_at(1, &BasePolynomial::constant(2, GaussianRational::from_ratio(1, 2).mul_i()));
        assert_eq!(p, want);
    }

    #[test]
    fn curved_sections_are_flat() {
        let fm = curved2d();
        let r = abelian_r(&fm, 5).unwrap();
        let a0 = &(&q(2, 0) * &q(2, 0)) * &q(2, 1);
        let s = flat_section(&fm, &r, &a0, 5).unwrap();
        let res = flatness_residual(&fm, &r, &s).unwrap();
        assert_eq!(res.known(), Known::Through(4));
        assert!(res.is_zero(), "{res}");
        let fixed = flat_section_fixed_point(&fm, &r, &a0, 5, 6).unwrap();
        assert_eq!(fixed, s.as_series());
    }

    #[test]
    fn star_is_associative_on_curved_chart() {
        let sp = StarProduct::new(curved2d(), 2).unwrap();
        let f = HbarPoly::from_poly(q(2, 0));
        let g = HbarPoly::from_poly(&q(2, 1) * &q(2, 1));
        let h = HbarPoly::from_poly(&q(2, 0) * &q(2, 1));
        let left = sp.star_series(&sp.star_series(&f, &g).unwrap(), &h).unwrap();
        let right = sp.star_series(&f, &sp.star_series(&g, &h).unwrap()).unwrap();
        assert_eq!(left, right);
    }
}
