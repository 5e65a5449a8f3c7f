//! `strongdom` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or malformed input, 2 mathematical
//! rejection, 64 usage error.

mod mart;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use strongdom::gridapprox::{self, PiecewiseFunction, PiecewiseJson};
use strongdom::matrix::MatrixJson;
use strongdom::rearrange::{self, common_refinement};
use strongdom::stochmat::{self, MatrixClass};
use strongdom::{transfer, Matrix, StepFunction};

use output::{read_json, Failure, Outcome};

#[derive(Parser, Debug)]
#[command(name = "strongdom", version, about = "Rearrangement, transfer-operator and martingale-tree tools")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GlobalOpts {
    /// Numerical tolerance for all checks.
    #[arg(long, global = true, default_value_t = strongdom::DEFAULT_TOL, value_parser = parse_tol)]
    tol: f64,

    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for parallel sweeps; results do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Birkhoff decomposition of a doubly stochastic matrix.
    Decompose(MatrixInput),
    /// Sub-doubly stochastic N with M + N doubly stochastic.
    Complete(MatrixInput),
    /// Signed permutation decomposition of a zero-sum contraction.
    SignedDecompose(MatrixInput),
    /// 2n×2n doubly stochastic embedding of a sub-doubly stochastic matrix.
    Embed(MatrixInput),
    /// Contraction T with Tf = g, or exit 2 when g# is not majorized by f#.
    Transfer(PairInput),
    /// Compares the λ-condition with weak majorization of rearrangements.
    MajorizeCheck(PairInput),
    /// Grid approximation of a zero-mean dominated pair.
    Approx(ApproxArgs),
    /// Martingale trees.
    #[command(subcommand)]
    Mart(mart::MartCommand),
}

#[derive(Args, Debug)]
struct MatrixInput {
    /// Matrix JSON: {"n": n, "rows": [[...], ...]}.
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Args, Debug)]
struct PairInput {
    /// Step function JSON: {"n": N, "values": [...]}.
    #[arg(long)]
    f: PathBuf,
    #[arg(long)]
    g: PathBuf,
}

#[derive(Args, Debug)]
struct ApproxArgs {
    /// Piecewise JSON: {"pieces": [{"from": [num, den], "to": [num, den], "value": v}]}.
    #[arg(long)]
    d: PathBuf,
    #[arg(long)]
    e: PathBuf,
    #[arg(long, value_parser = parse_positive)]
    eps: f64,
    #[arg(long, default_value_t = 2.0, value_parser = parse_exponent)]
    p: f64,
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err("must be a finite nonnegative number".into())
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err("must be a finite positive number".into())
    }
}

/// `p ∈ [1, ∞]`; accepts `inf`.
pub(crate) fn parse_exponent(s: &str) -> Result<f64, String> {
    let v: f64 = match s {
        "inf" | "infinity" | "∞" => f64::INFINITY,
        _ => s.parse().map_err(|e| format!("{e}"))?,
    };
    if v >= 1.0 {
        Ok(v)
    } else {
        Err("p must lie in [1, inf]".into())
    }
}

fn read_matrix(path: &Path) -> Result<Matrix, Failure> {
    let json: MatrixJson = read_json(path)?;
    Ok(Matrix::from_json(json)?)
}

fn read_step(path: &Path) -> Result<StepFunction, Failure> {
    read_json(path)
}

fn read_piecewise(path: &Path) -> Result<PiecewiseFunction, Failure> {
    let json: PiecewiseJson = read_json(path)?;
    Ok(PiecewiseFunction::from_json(&json)?)
}

#[derive(Serialize)]
struct ClassifiedMatrix {
    n: usize,
    rows: Vec<Vec<f64>>,
    class: MatrixClass,
}

impl ClassifiedMatrix {
    fn new(m: stochmat::ContractionMatrix) -> Self {
        let class = m.class();
        let MatrixJson { n, rows } = m.matrix().to_json();
        Self { n, rows, class }
    }
}

fn json_only(global: &GlobalOpts) -> Result<(), Failure> {
    if global.format == Format::Csv {
        return Err(Failure::Usage("--format csv is only supported by `mart ratio`".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let g = &cli.global;
    if let Some(w) = g.workers {
        strongdom::par::init_workers(w as usize);
    }
    match cli.command {
        Command::Decompose(a) => {
            json_only(g)?;
            let m = read_matrix(&a.input)?;
            Outcome::json(&stochmat::birkhoff_decompose(&m, g.tol)?.to_json())
        }
        Command::Complete(a) => {
            json_only(g)?;
            let m = read_matrix(&a.input)?;
            Outcome::json(&ClassifiedMatrix::new(stochmat::complete_to_double(&m, g.tol)?))
        }
        Command::SignedDecompose(a) => {
            json_only(g)?;
            let m = read_matrix(&a.input)?;
            Outcome::json(&stochmat::signed_decompose(&m, g.tol)?.to_json())
        }
        Command::Embed(a) => {
            json_only(g)?;
            let m = read_matrix(&a.input)?;
            Outcome::json(&ClassifiedMatrix::new(stochmat::embed_double(&m, g.tol)?))
        }
        Command::Transfer(a) => {
            json_only(g)?;
            let (f, gg) = common_refinement(&read_step(&a.f)?, &read_step(&a.g)?);
            Outcome::json(&transfer::construct_transfer(f.values(), gg.values(), g.tol)?)
        }
        Command::MajorizeCheck(a) => {
            json_only(g)?;
            let f = read_step(&a.f)?;
            let gg = read_step(&a.g)?;
            let report = rearrange::check_lambda_equivalence(&f, &gg, g.tol);
            let out = Outcome::json(&report)?;
            if report.majorization {
                Ok(out)
            } else {
                Err(out.reject("g is not weakly majorized by f"))
            }
        }
        Command::Approx(a) => {
            json_only(g)?;
            let d = read_piecewise(&a.d)?;
            let e = read_piecewise(&a.e)?;
            Outcome::json(&gridapprox::approximate_pair_with_tol(&d, &e, a.eps, a.p, g.tol)?)
        }
        Command::Mart(cmd) => mart::run(cmd, g),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    let out = cli.global.out.clone();
    match run(cli).and_then(|o| o.write(out.as_deref())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
