use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fedosov::dump::SeriesDump;
use fedosov::expr::parse_polynomial;
use fedosov::fedosov::{
    abelian_r, check_abelian, commuting_case_degree, finiteness_test, CommutingDegree, FinitenessVerdict, StarProduct,
};
use fedosov::geometry::{curvature_tensor, validate};
use fedosov::manifest::Manifest;
use fedosov::twodim::{cascade_solve, square_check, CoefficientTable};
use fedosov::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CHECK_FAILED: u8 = 1;
const INVALID_SPEC: u8 = 2;
const PARSE_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "fedosov", version, about = "Exact Fedosov quantization on Darboux charts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a manifest and report on the chart and connection.
    Validate { manifest: PathBuf },
    /// Compute the correction r[3..N] of the Abelian connection.
    Abelian {
        manifest: PathBuf,
        /// Highest grade N (at least 3); defaults to the manifest's max_degree, else 6.
        #[arg(long, value_parser = clap::value_parser!(u32).range(3..))]
        degree: Option<u32>,
        /// Verify the Abelian equation and the normalization of r.
        #[arg(long)]
        check: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        out: Format,
    },
    /// Star product of two polynomial observables.
    Star {
        manifest: PathBuf,
        a0: String,
        b0: String,
        /// Highest power of hbar; defaults to the manifest's hbar_order, else 2.
        #[arg(long)]
        order: Option<u32>,
    },
    /// Test whether the correction is a finite sum.
    Finite {
        manifest: PathBuf,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(4..))]
        zmax: u32,
    },
    /// Random nonvanishing trials for squares of 2D one-forms, then the
    /// elimination of all coefficients.
    #[command(alias = "prop41")]
    Squares {
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
        z: u32,
        #[arg(long, default_value_t = 50)]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Parse { .. }) { PARSE_ERROR } else { INVALID_SPEC };
        Failure { code, msg: e.to_string() }
    }
}

/// Normal output plus the exit code it should end with.
struct Report {
    out: String,
    code: u8,
}

impl Report {
    fn ok(out: String) -> Self {
        Self { out, code: 0 }
    }
}

fn load(path: &Path) -> Result<Manifest, Failure> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| Failure { code: INVALID_SPEC, msg: format!("cannot read {}: {e}", path.display()) })?;
    Ok(Manifest::from_toml_str(&src)?)
}

fn cmd_validate(path: &Path) -> Result<Report, Failure> {
    let m = load(path)?;
    let report = validate(&m.manifold, &m.connection)?;
    let curvature = curvature_tensor(&m.manifold, &m.connection);
    let mut out = String::new();
    writeln!(out, "dimension: {}", report.dim).unwrap();
    writeln!(
        out,
        "connection entries: {} (at most {} independent)",
        report.connection_entries, report.max_independent_entries
    )
    .unwrap();
    writeln!(out, "flat chart: {}", if report.flat_chart { "yes" } else { "no" }).unwrap();
    writeln!(out, "nonzero curvature components: {}", curvature.components().count()).unwrap();
    writeln!(out, "OK").unwrap();
    Ok(Report::ok(out))
}

fn cmd_abelian(path: &Path, degree: Option<u32>, check: bool, format: Format) -> Result<Report, Failure> {
    let m = load(path)?;
    let n = degree.or(m.max_degree).unwrap_or(6);
    if n < 3 {
        return Err(Failure { code: INVALID_SPEC, msg: format!("max_degree {n} is below 3") });
    }
    let fm = m.fedosov()?;
    let r = abelian_r(&fm, n)?;
    let mut out = String::new();
    match format {
        Format::Text => {
            for z in 3..=n {
                let g = r.grade(z)?;
                writeln!(out, "r[{z}]:{}", if g.is_zero() { " 0" } else { "" }).unwrap();
                for t in g.to_terms() {
                    writeln!(out, "  {t}").unwrap();
                }
            }
        }
        Format::Json => {
            let grades: Vec<serde_json::Value> = (3..=n)
                .map(|z| {
                    let dump = SeriesDump::from_series(&r.grade(z).expect("within bound"));
                    serde_json::json!({ "grade": z, "series": dump })
                })
                .collect();
            let doc = serde_json::json!({ "known_through": n, "grades": grades });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json")).unwrap();
        }
    }
    let mut code = 0;
    if check {
        let report = check_abelian(&fm, &r, n)?;
        let mut lines = String::new();
        let mut line = |name: &str, ok: bool| {
            writeln!(lines, "check {name}: {}", if ok { "ok" } else { "FAILED" }).unwrap();
        };
        match &report.first_failure {
            None => line(&format!("Abelian equation through grade {}", n - 1), true),
            Some((g, _)) => line(&format!("Abelian equation at grade {g}"), false),
        }
        line("central curvature", report.curvature_central);
        line("delta^-1 r = 0", report.normalized);
        line("even hbar powers", report.even_hbar);
        line("fiber degree >= 1", report.fiber_nonempty);
        line("r[3] = delta^-1 R", report.seed_matches);
        if !report.passed() {
            code = CHECK_FAILED;
        }
        match format {
            Format::Text => out.push_str(&lines),
            Format::Json => eprint!("{lines}"),
        }
    }
    Ok(Report { out, code })
}

fn cmd_star(path: &Path, a0: &str, b0: &str, order: Option<u32>) -> Result<Report, Failure> {
    let m = load(path)?;
    let k = order.or(m.hbar_order).unwrap_or(2);
    let dim = m.manifold.dim();
    let a = parse_polynomial(a0, dim)?;
    let b = parse_polynomial(b0, dim)?;
    let sp = StarProduct::new(m.fedosov()?, k)?;
    let p = sp.star(&a, &b)?;
    let mut out = String::new();
    writeln!(out, "({a}) * ({b}) = {p} + O(hbar^{})", k + 1).unwrap();
    for j in 0..=k {
        writeln!(out, "  hbar^{j}: {}", p.get(j)).unwrap();
    }
    Ok(Report::ok(out))
}

fn cmd_finite(path: &Path, zmax: u32) -> Result<Report, Failure> {
    let m = load(path)?;
    let fm = m.fedosov()?;
    let mut out = String::new();
    if fm.curvature().is_zero() {
        writeln!(out, "finite, r = 0 (flat connection)").unwrap();
        return Ok(Report::ok(out));
    }
    let r = abelian_r(&fm, zmax - 1)?;
    let mut every_square_fails = true;
    for mm in 4..=zmax {
        let report = finiteness_test(&fm, &r, mm)?;
        match &report.verdict {
            FinitenessVerdict::FiniteConsistent => {
                let degree = r.nonzero_grades().into_iter().filter(|&z| z < mm).max().unwrap_or(0);
                writeln!(out, "finite, deg(r)={degree}").unwrap();
                writeln!(out, "  all {} equations hold at m = {mm}", report.equations.len()).unwrap();
                match commuting_case_degree(&fm, zmax) {
                    Ok(CommutingDegree::Finite { minimal_z, .. }) => {
                        writeln!(out, "  commuting case: (dG delta^-1)^(z-3) R = 0 first at z = {minimal_z}").unwrap()
                    }
                    Ok(_) | Err(Error::CommutingHypothesis(..)) => {}
                    Err(e) => return Err(e.into()),
                }
                return Ok(Report::ok(out));
            }
            FinitenessVerdict::Violated { first, violated } => {
                let eq = &report.equations[first - 1];
                let list: Vec<String> = violated.iter().map(|v| v.to_string()).collect();
                writeln!(out, "m = {mm}: violated at {} (equations {})", eq.label, list.join(", ")).unwrap();
                every_square_fails &= !report.equations.last().expect("nonempty").holds();
            }
        }
    }
    if every_square_fails {
        writeln!(out, "not finite within zmax = {zmax}: violated at r[m-1] o r[m-1] for every m <= {zmax}").unwrap();
    } else {
        writeln!(out, "not finite within zmax = {zmax}").unwrap();
    }
    Ok(Report::ok(out))
}

fn cmd_squares(z: u32, trials: u32, seed: u64) -> Result<Report, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    let mut zero_squares = 0;
    let mut done = 0;
    while done < trials {
        let t = CoefficientTable::random(z, 0.5, &mut rng)?;
        if t.is_zero() {
            continue;
        }
        done += 1;
        let sq = square_check(&t.to_two_form())?;
        if sq.is_zero() {
            zero_squares += 1;
            writeln!(out, "trial {done}: square vanished for nonzero F = {}", t.to_two_form()).unwrap();
        }
    }
    writeln!(out, "{trials} random nonzero F of degree {}: {} nonzero squares", z - 1, trials - zero_squares).unwrap();
    let transcript = match cascade_solve(z) {
        Ok(t) => t,
        Err(e @ (Error::ZeroPivot { .. } | Error::CascadeStuck { .. })) => {
            writeln!(out, "cascade FAILED: {e}").unwrap();
            return Ok(Report { out, code: CHECK_FAILED });
        }
        Err(e) => return Err(e.into()),
    };
    writeln!(out, "{transcript}").unwrap();
    Ok(Report { out, code: if zero_squares > 0 { CHECK_FAILED } else { 0 } })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { manifest } => cmd_validate(manifest),
        Command::Abelian { manifest, degree, check, out } => cmd_abelian(manifest, *degree, *check, *out),
        Command::Star { manifest, a0, b0, order } => cmd_star(manifest, a0, b0, *order),
        Command::Finite { manifest, zmax } => cmd_finite(manifest, *zmax),
        Command::Squares { z, trials, seed } => cmd_squares(*z, *trials, *seed),
    };
    match result {
        Ok(report) => {
            print!("{}", report.out);
            ExitCode::from(report.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
