//! Runs every acceptance criterion and prints one PASS/FAIL line for each.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use fedosov::algebra::GaussianRational;
use fedosov::calculus::{covariant_d, delta, delta_inv, ext_d, hodge_split};
use fedosov::fedosov::{
    abelian_r, abelian_r_iterative, check_abelian, commuting_case_degree, finiteness_test, CommutingDegree,
    FinitenessVerdict, StarProduct,
};
use fedosov::geometry::{curvature_form, curvature_tensor, CurvatureRoute};
use fedosov::twodim::{
    cascade_solve, f_coeff, g_coeff, monomial_circ, square_check, square_coefficient, CoefficientTable,
};
use fedosov::weyl::{WeylAlgebra, WeylSeries};
use fedosov::{BasePolynomial, HbarPoly, ManifoldSpec};
use num_rational::BigRational;
use num_traits::One;
use rand::Rng;

type Outcome = Result<(), String>;
type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn by_form_degree(s: &WeylSeries, dim: usize) -> Vec<(usize, WeylSeries)> {
    (0..=dim).map(|m| (m, s.form_part(m))).filter(|(_, p)| !p.is_zero()).collect()
}

fn c1_operator_identities() -> Outcome {
    let mut rng = rng(101);
    for dim in [2usize, 4] {
        let alg = WeylAlgebra::standard(dim);
        for n in 0..100 {
            let a = random_series(&mut rng, dim, 6, 4);
            ensure(delta(&delta(&a)).is_zero(), || format!("δ² ≠ 0 (dim {dim}, case {n})"))?;
            ensure(delta_inv(&delta_inv(&a)).is_zero(), || format!("(δ⁻¹)² ≠ 0 (dim {dim}, case {n})"))?;
            let anti = ext_d(&delta(&a)).add(&delta(&ext_d(&a)));
            ensure(anti.is_zero(), || format!("dδ + δd ≠ 0 (dim {dim}, case {n})"))?;
            let h = hodge_split(&a);
            ensure(h.exact.add(&h.coexact).add(&h.harmonic) == a, || {
                format!("Hodge split fails (dim {dim}, case {n})")
            })?;

            let b = random_series(&mut rng, dim, 4, 3);
            for (m1, a1) in by_form_degree(&a, dim) {
                let lhs = delta(&alg.circ(&a1, &b, None).unwrap());
                let sign = if m1 % 2 == 0 { GaussianRational::one() } else { -GaussianRational::one() };
                let rhs = alg
                    .circ(&delta(&a1), &b, None)
                    .unwrap()
                    .add(&alg.circ(&a1, &delta(&b), None).unwrap().scale(&sign));
                ensure(lhs == rhs, || format!("Leibniz fails (dim {dim}, case {n}, m1 {m1})"))?;
            }
        }
    }
    Ok(())
}

fn c2_weyl_algebra() -> Outcome {
    let mut rng = rng(202);
    for dim in [2usize, 4] {
        let alg = WeylAlgebra::standard(dim);
        for n in 0..100 {
            let za = rng.gen_range(0..=4);
            let zb = rng.gen_range(0..=4);
            let zc = rng.gen_range(0..=(10 - za - zb).min(3));
            let (ma, mb) = (rng.gen_range(0..=1), rng.gen_range(0..=1));
            let a = random_homogeneous(&mut rng, dim, za, ma, 2);
            let b = random_homogeneous(&mut rng, dim, zb, mb, 2);
            let c = random_homogeneous(&mut rng, dim, zc, 0, 2);
            let ab = alg.circ(&a, &b, None).unwrap();
            if !ab.is_zero() {
                ensure(ab.min_degree() == Some(za + zb) && ab.max_degree() == Some(za + zb), || {
                    format!("degree of a∘b is not {} (dim {dim}, case {n})", za + zb)
                })?;
            }
            let left = alg.circ(&ab, &c, None).unwrap();
            let right = alg.circ(&a, &alg.circ(&b, &c, None).unwrap(), None).unwrap();
            ensure(left == right, || format!("∘ not associative (dim {dim}, case {n})"))?;
        }
    }
    Ok(())
}

fn c3_two_dim_closed_form() -> Outcome {
    let alg = WeylAlgebra::standard(2);
    for r in 0..=5u32 {
        for j in 0..=5u32 {
            for s in 0..=5u32 {
                for k in 0..=5u32 {
                    let a = WeylSeries::monomial(2, 0, &[r, j], &[], GaussianRational::one());
                    let b = WeylSeries::monomial(2, 0, &[s, k], &[], GaussianRational::one());
                    ensure(monomial_circ(r, j, s, k) == alg.circ(&a, &b, None).unwrap(), || {
                        format!("monomial_circ({r},{j},{s},{k}) differs from ∘")
                    })?;
                }
            }
        }
    }
    let half = |n: u32| BigRational::new((n as i64).into(), 2.into());
    for z in 1..=10u32 {
        ensure(f_coeff(1, z - 1, 0, z, 1).unwrap() == half(z), || format!("f(1,{},0,{z},1) ≠ {z}/2", z - 1))?;
    }
    for z in 2..=10u32 {
        ensure(f_coeff(2, z - 2, 1, z - 1, 1).unwrap() == half(z), || format!("f(2,{},1,{},1) ≠ {z}/2", z - 2, z - 1))?;
    }
    for z in 5..=10u32 {
        ensure(f_coeff(2, z - 5, 0, z - 4, 1).unwrap() == half(2 * (z - 4)), || {
            format!("f(2,{},0,{},1) ≠ {}", z - 5, z - 4, z - 4)
        })?;
    }
    Ok(())
}

fn c4_curvature() -> Outcome {
    let mut rng = rng(404);
    for dim in [2usize, 4] {
        let m = ManifoldSpec::standard(dim).unwrap();
        for n in 0..10 {
            let c = random_connection(&mut rng, dim, 3);
            let t = curvature_tensor(&m, &c);
            for i in 0..dim {
                for j in 0..dim {
                    for k in 0..dim {
                        for l in 0..dim {
                            let r = t.get(i, j, k, l);
                            ensure(r == t.get(j, i, k, l), || format!("R not symmetric in ij (dim {dim}, case {n})"))?;
                            ensure(r == -&t.get(i, j, l, k), || {
                                format!("R not antisymmetric in kl (dim {dim}, case {n})")
                            })?;
                            let cyc = &(&r + &t.get(i, k, l, j)) + &t.get(i, l, j, k);
                            ensure(cyc.is_zero(), || format!("cyclic identity fails (dim {dim}, case {n})"))?;
                        }
                    }
                }
            }
            let via_tensor = curvature_form(&m, &c, CurvatureRoute::Tensor).unwrap();
            let via_form = curvature_form(&m, &c, CurvatureRoute::FormEquation).unwrap();
            ensure(via_tensor == via_form, || format!("curvature routes disagree (dim {dim}, case {n})"))?;
            ensure(delta(&via_form).is_zero(), || format!("δR ≠ 0 (dim {dim}, case {n})"))?;
            ensure(delta(&delta_inv(&via_form)) == via_form, || format!("R ≠ δδ⁻¹R (dim {dim}, case {n})"))?;
        }
    }
    let fm = curved2d();
    let t = curvature_tensor(fm.manifold(), fm.connection());
    let expected = -&BasePolynomial::one(2);
    ensure(t.get(1, 0, 1, 0) == expected, || format!("R_2121 = {}, expected -1", t.get(1, 0, 1, 0)))
}

fn c5_flat() -> Outcome {
    let fm = flat(2);
    let r = abelian_r(&fm, 10).map_err(|e| e.to_string())?;
    ensure(r.nonzero_grades().is_empty(), || "flat chart has nonzero correction".into())?;
    let sp = StarProduct::new(fm, 2).map_err(|e| e.to_string())?;
    let (q1, q2) = (q(2, 0), q(2, 1));
    let qp = sp.star(&q1, &q2).unwrap();
    let pq = sp.star(&q2, &q1).unwrap();
    let mut want = HbarPoly::from_poly(&q1 * &q2);
    want.add_at(1, &BasePolynomial::constant(2, GaussianRational::from_ratio(1, 2).mul_i()));
    ensure(qp == want, || format!("q*p = {qp}"))?;
    let mut ihbar = HbarPoly::zero(2);
    ihbar.add_at(1, &BasePolynomial::constant(2, GaussianRational::i()));
    ensure(qp.sub(&pq) == ihbar, || format!("q*p - p*q = {}", qp.sub(&pq)))
}

fn c6_curved() -> Outcome {
    let fm = curved2d();
    let r = abelian_r(&fm, 9).map_err(|e| e.to_string())?;
    for z in 3..=9 {
        ensure(!r.grade(z).unwrap().is_zero(), || format!("r[{z}] = 0"))?;
    }
    let report = check_abelian(&fm, &r, 9).map_err(|e| e.to_string())?;
    ensure(report.first_failure.is_none(), || {
        format!("residual at grade {}", report.first_failure.as_ref().unwrap().0)
    })?;
    ensure(report.curvature_central, || "curvature of the Abelian connection is not central".into())?;
    ensure(report.normalized, || "δ⁻¹r ≠ 0".into())?;
    ensure(report.even_hbar, || "odd power of ħ in r".into())?;
    ensure(report.fiber_nonempty && report.seed_matches, || format!("{report:?}"))?;
    let it = abelian_r_iterative(&fm, 9, 9).map_err(|e| e.to_string())?;
    for z in 3..=9 {
        ensure(it.grade(z).unwrap() == r.grade(z).unwrap(), || format!("iteration differs at grade {z}"))?;
    }
    Ok(())
}

fn c7_commuting() -> Outcome {
    let fm = commuting4d();
    let r = abelian_r(&fm, 9).map_err(|e| e.to_string())?;
    let seed = delta_inv(fm.curvature());
    ensure(r.as_series().truncate(9) == seed.truncate(9), || "r ≠ δ⁻¹R through grade 9".into())?;
    let fin = finiteness_test(&fm, &r, 4).map_err(|e| e.to_string())?;
    ensure(fin.verdict == FinitenessVerdict::FiniteConsistent, || format!("{:?}", fin.verdict))?;
    let deg = commuting_case_degree(&fm, 9).map_err(|e| e.to_string())?;
    ensure(deg == CommutingDegree::Finite { minimal_z: 4, degree: 3 }, || format!("{deg:?}"))?;
    let rest = covariant_d(fm.algebra(), fm.gamma(), &delta_inv(fm.curvature())).unwrap();
    ensure(rest.is_zero(), || "(∂_Γδ⁻¹)R ≠ 0 at z = 4".into())?;
    ensure(!fm.curvature().is_zero(), || "R = 0 for the 4D fixture".into())
}

fn c8_square_nonvanishing() -> Outcome {
    let mut rng = rng(808);
    let mut count = 0;
    while count < 50 {
        let z = rng.gen_range(1..=8);
        let t = CoefficientTable::random(z, 0.5, &mut rng).unwrap();
        if t.is_zero() {
            continue;
        }
        count += 1;
        let sq = square_check(&t.to_two_form()).map_err(|e| e.to_string())?;
        ensure(!sq.is_zero(), || format!("δ⁻¹F∘δ⁻¹F = 0 for nonzero F at z = {z}"))?;
    }
    for z in 1..=8u32 {
        let t = CoefficientTable::random(z, 0.8, &mut rng).unwrap();
        let sq = square_check(&t.to_two_form()).unwrap().square;
        for a in 0..=((2 * z - 2) / 4) {
            for b in 0..=(2 * z - 2 - 4 * a) {
                let g = g_coeff(&t, a, b).unwrap();
                ensure(square_coefficient(&sq, z, a, b).unwrap() == BasePolynomial::constant(2, g), || {
                    format!("g mismatch at z={z} A={a} B={b}")
                })?;
            }
        }
        let tr = cascade_solve(z).map_err(|e| e.to_string())?;
        ensure(tr.steps.iter().all(|s| !num_traits::Zero::is_zero(&s.factor)), || format!("zero pivot at z = {z}"))?;
        let iz = GaussianRational::from_int(z as i64).mul_i();
        ensure(tr.steps[0].factor == iz, || format!("first pivot {} at z = {z}", tr.steps[0].factor))?;
        ensure(tr.steps.len() == CoefficientTable::indices(z).len(), || format!("cascade incomplete at z = {z}"))?;
    }
    Ok(())
}

fn c9_star_axioms() -> Outcome {
    let fm = curved2d();
    let sp = StarProduct::new(fm.clone(), 3).map_err(|e| e.to_string())?;
    let mut rng = rng(909);
    let one = BasePolynomial::one(2);
    for n in 0..8 {
        let a = random_poly(&mut rng, 2, 3, 3);
        let b = random_poly(&mut rng, 2, 3, 3);
        let c = random_poly(&mut rng, 2, 2, 2);
        let fa = HbarPoly::from_poly(a.clone());
        ensure(sp.star(&one, &a).unwrap() == fa && sp.star(&a, &one).unwrap() == fa, || {
            format!("unit law fails (case {n})")
        })?;
        let ab = sp.star(&a, &b).unwrap();
        let ba = sp.star(&b, &a).unwrap();
        ensure(ab.get(0) == &a * &b, || format!("ħ⁰ part is not the product (case {n})"))?;
        let pb = fm.manifold().poisson_bracket(&a, &b).scale(&GaussianRational::i());
        ensure(ab.sub(&ba).get(1) == pb, || format!("ħ¹ antisymmetric part is not i{{a,b}} (case {n})"))?;
        let (ha, hb, hc) = (fa, HbarPoly::from_poly(b), HbarPoly::from_poly(c));
        let left = sp.star_series(&sp.star_series(&ha, &hb).unwrap(), &hc).unwrap();
        let right = sp.star_series(&ha, &sp.star_series(&hb, &hc).unwrap()).unwrap();
        ensure(left == right, || format!("star not associative through ħ³ (case {n})"))?;
    }
    Ok(())
}

fn run(label: &str, limit: Option<Duration>, f: fn() -> Outcome) -> bool {
    let start = Instant::now();
    let result = panic::catch_unwind(AssertUnwindSafe(f));
    let elapsed = start.elapsed();
    let outcome = match result {
        Ok(Ok(())) => match limit {
            Some(l) if elapsed > l => Err(format!("took {:.1}s, limit {}s", elapsed.as_secs_f64(), l.as_secs())),
            _ => Ok(()),
        },
        Ok(Err(msg)) => Err(msg),
        Err(_) => Err("panicked".into()),
    };
    match &outcome {
        Ok(()) => println!("PASS  {label}  ({:.2}s)", elapsed.as_secs_f64()),
        Err(msg) => println!("FAIL  {label}  ({:.2}s): {msg}", elapsed.as_secs_f64()),
    }
    outcome.is_ok()
}

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria: [Criterion; 9] = [
        ("1 operator identities", secs(30), c1_operator_identities),
        ("2 Weyl algebra degree and associativity", secs(60), c2_weyl_algebra),
        ("3 2D closed-form products and f values", secs(30), c3_two_dim_closed_form),
        ("4 curvature symmetries and routes", None, c4_curvature),
        ("5 flat 2D correction and Moyal product", secs(10), c5_flat),
        ("6 curved 2D correction", secs(120), c6_curved),
        ("7 4D commuting fixture", None, c7_commuting),
        ("8 square nonvanishing and cascade", secs(120), c8_square_nonvanishing),
        ("9 star product axioms", secs(120), c9_star_axioms),
    ];
    let mut failed = 0;
    for (label, limit, f) in criteria {
        if !run(label, limit, f) {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
