use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use strongdom::marttree::{
    self, check_domination, check_kappa_domination, check_lambda_condition,
    check_strong_domination, check_subordination, dominated_pair, proof_pipeline,
    run_ratio_experiment, MartingaleTree, NodeId, NodeMap, PairKind, PairParams, RatioConfig,
    TreeJson,
};
use strongdom::matrix::MatrixJson;
use strongdom::par::Execution;
use strongdom::Matrix;

use crate::output::{read_json, Failure, Outcome};
use crate::{parse_exponent, Format, GlobalOpts};

#[derive(Subcommand, Debug)]
pub enum MartCommand {
    /// Random pair (d, e) satisfying the generator's hypothesis.
    Generate(GenerateArgs),
    /// Node-wise hypothesis checks for a pair.
    Verify(VerifyArgs),
    /// Ratios ‖Σe‖_p / ‖Σd‖_p over generated pairs.
    Ratio(RatioArgs),
    /// Signed-permutation decomposition and index sampling at every node.
    Pipeline(PipelineArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ShapeArgs {
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..=64))]
    depth: u32,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(2..))]
    branching: u32,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, default_value = "subordinate", value_parser = parse_kind)]
    generator: PairKind,
    #[command(flatten)]
    shape: ShapeArgs,
    /// Scale for the kappa generator.
    #[arg(long, default_value_t = 1.0, value_parser = parse_kappa)]
    kappa: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Subordinate,
    Strong,
    Weak,
    Lambda,
    Kappa,
}

#[derive(Args, Debug)]
pub struct PairFiles {
    /// Pair JSON as written by `mart generate`.
    #[arg(long, conflicts_with_all = ["d", "e"])]
    pair: Option<PathBuf>,
    /// Tree JSON: {"depth": n, "branching": N, "nodes": {"2.1": [...], ...}}.
    #[arg(long, requires = "e")]
    d: Option<PathBuf>,
    #[arg(long, requires = "d")]
    e: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    files: PairFiles,
    /// Check that decides the exit status.
    #[arg(long, value_enum, default_value_t = CheckKind::Weak)]
    check: CheckKind,
    #[arg(long, default_value_t = 1.0, value_parser = parse_kappa)]
    kappa: f64,
}

#[derive(Args, Debug)]
pub struct RatioArgs {
    #[arg(long, default_value = "subordinate", value_parser = parse_kind)]
    generator: PairKind,
    #[command(flatten)]
    shape: ShapeArgs,
    /// Exponent; repeatable. Accepts `inf`.
    #[arg(long = "p", value_parser = parse_exponent, default_values_t = [2.0])]
    ps: Vec<f64>,
    /// Monte Carlo samples per norm; 0 enumerates all paths.
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[arg(long, default_value_t = 1.0, value_parser = parse_kappa)]
    kappa: f64,
    /// Number of generated pairs.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pairs: u64,
}

#[derive(Args, Debug)]
pub struct PipelineArgs {
    /// Pair JSON with operators, as written by `mart generate --generator operator`.
    /// Without it an operator pair is generated from --depth, --branching and --seed.
    #[arg(long)]
    pair: Option<PathBuf>,
    #[command(flatten)]
    shape: ShapeArgs,
}

fn parse_kind(s: &str) -> Result<PairKind, String> {
    s.parse().map_err(|e: strongdom::Error| e.to_string())
}

fn parse_kappa(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v >= 1.0 {
        Ok(v)
    } else {
        Err("κ must be a finite number ≥ 1".into())
    }
}

/// Pair file layout shared by `generate`, `verify` and `pipeline`.
#[derive(Serialize, Deserialize)]
struct PairJson {
    generator: Option<PairKind>,
    seed: Option<u64>,
    kappa: Option<f64>,
    d: TreeJson,
    e: TreeJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    operators: Option<BTreeMap<String, MatrixJson>>,
}

fn operators_json(ops: &NodeMap<Matrix>) -> BTreeMap<String, MatrixJson> {
    ops.iter()
        .map(|(node, m)| (node.path_string(ops.branching()), m.to_json()))
        .collect()
}

fn operators_from_json(
    json: &BTreeMap<String, MatrixJson>,
    depth: usize,
    branching: usize,
) -> Result<NodeMap<Matrix>, Failure> {
    let mut by_node = BTreeMap::new();
    for (path, m) in json {
        let node = NodeId::parse(path, depth, branching)?;
        by_node.insert(node, Matrix::from_json(m.clone())?);
    }
    let count = by_node.len();
    let ops = NodeMap::try_from_fn(depth, branching, |node| {
        by_node.remove(&node).ok_or_else(|| {
            strongdom::Error::Format(format!(
                "no operator for node \"{}\"",
                node.path_string(branching)
            ))
        })
    })?;
    if ops.node_count() != count {
        return Err(strongdom::Error::Format("operators given for unknown nodes".into()).into());
    }
    Ok(ops)
}

fn read_pair(files: &PairFiles) -> Result<(MartingaleTree, MartingaleTree, Option<PairJson>), Failure> {
    match (&files.pair, &files.d, &files.e) {
        (Some(p), _, _) => {
            let json: PairJson = read_json(p)?;
            let d = MartingaleTree::from_json(&json.d)?;
            let e = MartingaleTree::from_json(&json.e)?;
            Ok((d, e, Some(json)))
        }
        (None, Some(d), Some(e)) => {
            let d: TreeJson = read_json(d)?;
            let e: TreeJson = read_json(e)?;
            Ok((MartingaleTree::from_json(&d)?, MartingaleTree::from_json(&e)?, None))
        }
        _ => Err(Failure::Usage("give --pair, or both --d and --e".into())),
    }
}

#[derive(Serialize)]
struct CheckOutcome {
    ok: bool,
    failed_nodes: Vec<String>,
}

impl From<NodeMap<bool>> for CheckOutcome {
    fn from(m: NodeMap<bool>) -> Self {
        Self {
            ok: m.all(),
            failed_nodes: m.failures(),
        }
    }
}

#[derive(Serialize)]
struct VerifyReport {
    depth: usize,
    branching: usize,
    subordination: CheckOutcome,
    strong_domination: CheckOutcome,
    weak_majorization: CheckOutcome,
    lambda_condition: CheckOutcome,
    kappa: marttree::KappaSummary,
    kappa_tail_failures: Vec<String>,
    verdict: &'static str,
    ok: bool,
}

/// One CSV line of `mart ratio`.
#[derive(Serialize)]
struct CsvRow<'a> {
    generator: &'a str,
    p: String,
    depth: usize,
    #[serde(rename = "N")]
    n: usize,
    ratio: f64,
    hypothesis_ok: bool,
    seed: u64,
}

fn shape(s: &ShapeArgs) -> (usize, usize) {
    (s.depth as usize, s.branching as usize)
}

fn json_only(g: &GlobalOpts) -> Result<(), Failure> {
    if g.format == Format::Csv {
        return Err(Failure::Usage("--format csv is only supported by `mart ratio`".into()));
    }
    Ok(())
}

pub fn run(cmd: MartCommand, g: &GlobalOpts) -> Result<Outcome, Failure> {
    match cmd {
        MartCommand::Generate(a) => {
            json_only(g)?;
            let (depth, branching) = shape(&a.shape);
            let params = PairParams {
                depth,
                branching,
                kappa: a.kappa,
            };
            let pair = dominated_pair(a.generator, params, g.seed)?;
            Outcome::json(&PairJson {
                generator: Some(pair.kind),
                seed: Some(g.seed),
                kappa: Some(pair.kappa),
                d: pair.d.to_json(),
                e: pair.e.to_json(),
                operators: pair.operators.as_ref().map(operators_json),
            })
        }
        MartCommand::Verify(a) => {
            json_only(g)?;
            let (d, e, _) = read_pair(&a.files)?;
            let kappa = check_kappa_domination(&d, &e, a.kappa, g.tol)?;
            let subordination = CheckOutcome::from(check_subordination(&d, &e)?);
            let strong_domination = CheckOutcome::from(check_strong_domination(&d, &e)?);
            let weak_majorization = CheckOutcome::from(check_domination(&d, &e, g.tol)?);
            let lambda_condition = CheckOutcome::from(check_lambda_condition(&d, &e, g.tol)?);
            let (verdict, ok) = match a.check {
                CheckKind::Subordinate => ("subordination", subordination.ok),
                CheckKind::Strong => ("strong_domination", strong_domination.ok),
                CheckKind::Weak => ("weak_majorization", weak_majorization.ok),
                CheckKind::Lambda => ("lambda_condition", lambda_condition.ok),
                CheckKind::Kappa => ("kappa", kappa.passes()),
            };
            let report = VerifyReport {
                depth: d.depth(),
                branching: d.branching(),
                subordination,
                strong_domination,
                weak_majorization,
                lambda_condition,
                kappa_tail_failures: kappa.tail_hypothesis.failures(),
                kappa: kappa.summary(),
                verdict,
                ok,
            };
            let out = Outcome::json(&report)?;
            if ok {
                Ok(out)
            } else {
                Err(out.reject(format!("{verdict} check failed")))
            }
        }
        MartCommand::Ratio(a) => {
            if (1..100).contains(&a.samples) {
                return Err(Failure::Usage("--samples must be 0 (exact) or at least 100".into()));
            }
            let (depth, branching) = shape(&a.shape);
            let cfg = RatioConfig {
                ps: a.ps,
                samples: a.samples,
                kappa: a.kappa,
                pairs: a.pairs as usize,
                seed: g.seed,
                tol: g.tol,
                exec: Execution::Parallel,
                ..RatioConfig::new(a.generator, depth, branching)
            };
            let report = run_ratio_experiment(&cfg)?;
            match g.format {
                Format::Json => Outcome::json(&report),
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    for r in &report.rows {
                        w.serialize(CsvRow {
                            generator: r.generator.name(),
                            p: marttree::format_p(r.p),
                            depth: r.depth,
                            n: r.branching,
                            ratio: r.ratio,
                            hypothesis_ok: r.hypothesis_ok,
                            seed: r.seed,
                        })
                        .context("writing CSV")
                        .map_err(Failure::Internal)?;
                    }
                    let bytes = w.into_inner().context("writing CSV").map_err(Failure::Internal)?;
                    let text = String::from_utf8(bytes).context("CSV is UTF-8").map_err(Failure::Internal)?;
                    Ok(Outcome::text(text))
                }
            }
        }
        MartCommand::Pipeline(a) => {
            json_only(g)?;
            let (d, ops) = match &a.pair {
                Some(path) => {
                    let json: PairJson = read_json(path)?;
                    let d = MartingaleTree::from_json(&json.d)?;
                    let ops = json.operators.as_ref().ok_or_else(|| {
                        Failure::Usage(format!("{} has no \"operators\" field", path.display()))
                    })?;
                    let ops = operators_from_json(ops, d.depth(), d.branching())?;
                    (d, ops)
                }
                None => {
                    let (depth, branching) = shape(&a.shape);
                    let pair = dominated_pair(PairKind::Operator, PairParams::new(depth, branching), g.seed)?;
                    (pair.d, pair.operators.expect("operator pairs carry operators"))
                }
            };
            let report = proof_pipeline(&d, &ops, g.seed, g.tol)?;
            let out = Outcome::json(&PipelineJson::new(&report))?;
            if report.passes() {
                Ok(out)
            } else {
                Err(out.reject("decomposition identity or tangency check failed"))
            }
        }
    }
}

#[derive(Serialize)]
struct PipelineNode {
    terms: strongdom::stochmat::DecompositionJson,
    sampled_index: usize,
    sign: f64,
    identity_deviation: f64,
    tangent: bool,
}

#[derive(Serialize)]
struct PipelineJson {
    summary: marttree::PipelineSummary,
    e: TreeJson,
    sampled: TreeJson,
    nodes: BTreeMap<String, PipelineNode>,
}

impl PipelineJson {
    fn new(r: &marttree::PipelineReport) -> Self {
        let n = r.e.branching();
        let nodes = r
            .decompositions
            .iter()
            .map(|(node, c)| {
                (
                    node.path_string(n),
                    PipelineNode {
                        terms: c.to_json(),
                        sampled_index: *r.indices.get(node),
                        sign: *r.signs.get(node),
                        identity_deviation: *r.identity_deviation.get(node),
                        tangent: *r.tangency.get(node),
                    },
                )
            })
            .collect();
        Self {
            summary: r.summary(),
            e: r.e.to_json(),
            sampled: r.sampled.to_json(),
            nodes,
        }
    }
}
