#![allow(dead_code)]

use fedosov::algebra::{FiberMonomial, GaussianRational, WedgeWord};
use fedosov::weyl::{TermKey, WeylSeries};
use fedosov::{BasePolynomial, ConnectionSpec, FedosovManifold, ManifoldSpec};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_scalar<R: Rng>(rng: &mut R) -> GaussianRational {
    let re = rng.gen_range(-3i64..=3);
    let im = if rng.gen_bool(0.3) { rng.gen_range(-2i64..=2) } else { 0 };
    let den = *[1i64, 1, 2, 3].choose(rng).unwrap();
    GaussianRational::from_ratio(re, den) + GaussianRational::from_int(im).mul_i()
}

pub fn random_poly<R: Rng>(rng: &mut R, dim: usize, max_deg: u32, nterms: usize) -> BasePolynomial {
    let mut p = BasePolynomial::zero(dim);
    for _ in 0..nterms {
        let mut e = vec![0u32; dim];
        let deg = rng.gen_range(0..=max_deg);
        for _ in 0..deg {
            e[rng.gen_range(0..dim)] += 1;
        }
        p.add_term(e, small_scalar(rng));
    }
    p
}

fn random_fiber<R: Rng>(rng: &mut R, dim: usize, len: u32) -> FiberMonomial {
    let mut e = vec![0u32; dim];
    for _ in 0..len {
        e[rng.gen_range(0..dim)] += 1;
    }
    FiberMonomial(e)
}

fn random_form<R: Rng>(rng: &mut R, dim: usize, m: usize) -> WedgeWord {
    let mut ix: Vec<usize> = (0..dim).collect();
    ix.shuffle(rng);
    let mut ix: Vec<usize> = ix.into_iter().take(m).collect();
    ix.sort_unstable();
    WedgeWord::from_sorted(&ix).unwrap()
}

/// A series of total degree `≤ max_grade` with mixed form degrees.
pub fn random_series<R: Rng>(rng: &mut R, dim: usize, max_grade: u32, nterms: usize) -> WeylSeries {
    let mut s = WeylSeries::zero(dim);
    for _ in 0..nterms {
        let grade = rng.gen_range(0..=max_grade);
        let hbar = rng.gen_range(0..=grade / 2);
        let fiber = random_fiber(rng, dim, grade - 2 * hbar);
        let m = rng.gen_range(0..=dim.min(3));
        let form = random_form(rng, dim, m);
        let mut one = WeylSeries::zero(dim);
        one.add_term(TermKey::new(hbar, fiber, form), random_poly(rng, dim, 2, 2));
        s = s.add(&one);
    }
    s
}

/// Homogeneous of degree `z` and form degree `m`.
pub fn random_homogeneous<R: Rng>(rng: &mut R, dim: usize, z: u32, m: usize, nterms: usize) -> WeylSeries {
    let mut s = WeylSeries::zero(dim);
    for _ in 0..nterms {
        let hbar = rng.gen_range(0..=z / 2);
        let fiber = random_fiber(rng, dim, z - 2 * hbar);
        let form = random_form(rng, dim, m);
        let mut one = WeylSeries::zero(dim);
        one.add_term(TermKey::new(hbar, fiber, form), random_poly(rng, dim, 1, 2));
        s = s.add(&one);
    }
    s
}

pub fn random_connection<R: Rng>(rng: &mut R, dim: usize, entries: usize) -> ConnectionSpec {
    let mut c = ConnectionSpec::flat(dim);
    for _ in 0..entries {
        let (i, j, k) = (rng.gen_range(0..dim), rng.gen_range(0..dim), rng.gen_range(0..dim));
        if c.get(i, j, k).is_zero() {
            c.insert(i, j, k, random_poly(rng, dim, 2, 2)).unwrap();
        }
    }
    c
}

pub fn q(dim: usize, k: usize) -> BasePolynomial {
    BasePolynomial::var(dim, k).unwrap()
}

pub fn flat(dim: usize) -> FedosovManifold {
    FedosovManifold::new(ManifoldSpec::standard(dim).unwrap(), ConnectionSpec::flat(dim)).unwrap()
}

/// `Γ_111 = Γ_222 = 1`.
pub fn curved2d() -> FedosovManifold {
    let one = BasePolynomial::one(2);
    let c = ConnectionSpec::flat(2).with(0, 0, 0, one.clone()).unwrap().with(1, 1, 1, one).unwrap();
    FedosovManifold::new(ManifoldSpec::standard(2).unwrap(), c).unwrap()
}

/// `Γ_111 = q3` in four dimensions.
pub fn commuting4d() -> FedosovManifold {
    let c = ConnectionSpec::flat(4).with(0, 0, 0, q(4, 2)).unwrap();
    FedosovManifold::new(ManifoldSpec::standard(4).unwrap(), c).unwrap()
}
