use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::GaussianRational;
use crate::error::{Error, Result};

/// Exponent vector over the base coordinates `q¹ … q^{2n}`.
pub type QExponents = Vec<u32>;

/// A multivariate polynomial in the base coordinates with Gaussian-rational
/// coefficients. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BasePolynomial {
    nvars: usize,
    terms: BTreeMap<QExponents, GaussianRational>,
}

impl BasePolynomial {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: GaussianRational) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, GaussianRational::one())
    }

    /// The coordinate function `q^{k+1}` (0-based `k`).
    pub fn var(nvars: usize, k: usize) -> Result<Self> {
        if k >= nvars {
            return Err(Error::IndexOutOfRange { index: k, dim: nvars });
        }
        let mut e = vec![0; nvars];
        e[k] = 1;
        Ok(Self::monomial(e, GaussianRational::one()))
    }

    pub fn monomial(exps: QExponents, c: GaussianRational) -> Self {
        let nvars = exps.len();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Self { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
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

    pub fn terms(&self) -> impl Iterator<Item = (&QExponents, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> GaussianRational {
        self.terms.get(exps).cloned().unwrap_or_else(GaussianRational::zero)
    }

    /// The value as a constant, if the polynomial has no `q` dependence.
    pub fn as_constant(&self) -> Option<GaussianRational> {
        match self.terms.len() {
            0 => Some(GaussianRational::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&x| x == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn add_term(&mut self, exps: QExponents, c: GaussianRational) {
        debug_assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign_ref(&mut self, rhs: &BasePolynomial) {
        for (e, c) in &rhs.terms {
            self.add_term(e.clone(), c.clone());
        }
    }

    pub fn sub_assign_ref(&mut self, rhs: &BasePolynomial) {
        for (e, c) in &rhs.terms {
            self.add_term(e.clone(), -c);
        }
    }

    pub fn scale(&self, k: &GaussianRational) -> Self {
        if k.is_zero() {
            return Self::zero(self.nvars);
        }
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect() }
    }

    pub fn scale_rational(&self, k: &BigRational) -> Self {
        if k.is_zero() {
            return Self::zero(self.nvars);
        }
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), c.scale(k))).collect() }
    }

    pub fn map_coeffs(&self, f: impl Fn(&GaussianRational) -> GaussianRational) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }

    /// Exact partial derivative `∂/∂q^{k+1}` (0-based `k`).
    pub fn dq(&self, k: usize) -> Result<Self> {
        if k >= self.nvars {
            return Err(Error::IndexOutOfRange { index: k, dim: self.nvars });
        }
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[k] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[k] -= 1;
            let factor = BigRational::from_integer(BigInt::from(e[k]));
            out.terms.insert(e2, c.scale(&factor));
        }
        Ok(out)
    }

    /// Evaluate at a rational point.
    pub fn eval(&self, point: &[GaussianRational]) -> GaussianRational {
        let mut acc = GaussianRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &p) in point.iter().zip(e) {
                for _ in 0..p {
                    t = &t * x;
                }
            }
            acc += &t;
        }
        acc
    }

    fn check_vars(&self, rhs: &Self) {
        assert_eq!(self.nvars, rhs.nvars, "polynomials over different coordinate sets");
    }
}

impl<'a> Add<&'a BasePolynomial> for &'a BasePolynomial {
    type Output = BasePolynomial;
    fn add(self, rhs: &BasePolynomial) -> BasePolynomial {
        self.check_vars(rhs);
        let mut out = self.clone();
        out.add_assign_ref(rhs);
        out
    }
}

impl<'a> Sub<&'a BasePolynomial> for &'a BasePolynomial {
    type Output = BasePolynomial;
    fn sub(self, rhs: &BasePolynomial) -> BasePolynomial {
        self.check_vars(rhs);
        let mut out = self.clone();
        out.sub_assign_ref(rhs);
        out
    }
}

impl<'a> Mul<&'a BasePolynomial> for &'a BasePolynomial {
    type Output = BasePolynomial;
    fn mul(self, rhs: &BasePolynomial) -> BasePolynomial {
        self.check_vars(rhs);
        if let Some(c) = self.as_constant() {
            return rhs.scale(&c);
        }
        if let Some(c) = rhs.as_constant() {
            return self.scale(&c);
        }
        let mut out = BasePolynomial::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                #[allow(clippy::suspicious_arithmetic_impl)]
                let e: QExponents = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl Neg for &BasePolynomial {
    type Output = BasePolynomial;
    fn neg(self) -> BasePolynomial {
        BasePolynomial { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }
}

impl Add for BasePolynomial {
    type Output = BasePolynomial;
    fn add(mut self, rhs: BasePolynomial) -> BasePolynomial {
        self.check_vars(&rhs);
        self.add_assign_ref(&rhs);
        self
    }
}

impl Sub for BasePolynomial {
    type Output = BasePolynomial;
    fn sub(mut self, rhs: BasePolynomial) -> BasePolynomial {
        self.check_vars(&rhs);
        self.sub_assign_ref(&rhs);
        self
    }
}

impl Mul for BasePolynomial {
    type Output = BasePolynomial;
    fn mul(self, rhs: BasePolynomial) -> BasePolynomial {
        &self * &rhs
    }
}

/// Prints as an expression over `q1 … q2n`, highest total degree first.
/// The output parses back with [`crate::expr::parse_polynomial`].
impl fmt::Display for BasePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut ordered: Vec<_> = self.terms.iter().collect();
        ordered.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        for (n, (e, c)) in ordered.into_iter().enumerate() {
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0)
                .map(|(k, &p)| if p == 1 { format!("q{}", k + 1) } else { format!("q{}^{}", k + 1, p) })
                .collect();
            let mut coeff = c.to_string();
            let negative = !c.is_compound() && coeff.starts_with('-');
            if negative {
                coeff.remove(0);
            }
            if n == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if negative { " - " } else { " + " })?;
            }
            let coeff = if c.is_compound() { format!("({})", coeff) } else { coeff };
            if vars.is_empty() {
                write!(f, "{}", coeff)?;
            } else if coeff == "1" {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", coeff, vars.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: usize, k: usize) -> BasePolynomial {
        BasePolynomial::var(n, k).unwrap()
    }

    fn c(n: usize, v: i64) -> BasePolynomial {
        BasePolynomial::constant(n, GaussianRational::from_int(v))
    }

    #[test]
    fn dq_examples() {
        let q1q2 = &q(2, 0) * &q(2, 1);
        assert_eq!(q1q2.dq(0).unwrap(), q(2, 1));
        assert!(c(2, 7).dq(1).unwrap().is_zero());
        let cube = &(&q(2, 0) * &q(2, 0)) * &q(2, 0);
        assert_eq!(cube.dq(0).unwrap(), &c(2, 3) * &(&q(2, 0) * &q(2, 0)));
        assert!(matches!(cube.dq(2), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn zero_is_empty() {
        let p = &q(2, 0) - &q(2, 0);
        assert!(p.is_zero());
        assert_eq!(p, BasePolynomial::zero(2));
        assert!(BasePolynomial::constant(3, GaussianRational::zero()).is_empty());
    }

    #[test]
    fn display() {
        let p = &(&q(2, 0) * &q(2, 1)) - &c(2, 3);
        assert_eq!(p.to_string(), "q1*q2 - 3");
        let p = BasePolynomial::monomial(vec![2, 0], GaussianRational::i()) + c(2, 1);
        assert_eq!(p.to_string(), "i*q1^2 + 1");
    }

    fn arb_poly(n: usize) -> impl Strategy<Value = BasePolynomial> {
        prop::collection::vec((prop::collection::vec(0u32..3, n), -5i64..5, -3i64..3), 0..5).prop_map(move |ts| {
            let mut p = BasePolynomial::zero(n);
            for (e, re, im) in ts {
                p.add_term(e, GaussianRational::from_int(re) + GaussianRational::from_int(im).mul_i());
            }
            p
        })
    }

    proptest! {
        #[test]
        fn leibniz_rule(a in arb_poly(3), b in arb_poly(3), k in 0usize..3) {
            let lhs = (&a * &b).dq(k).unwrap();
            let rhs = &(&a.dq(k).unwrap() * &b) + &(&a * &b.dq(k).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn ring_axioms(a in arb_poly(2), b in arb_poly(2), c in arb_poly(2)) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        }
    }
}
