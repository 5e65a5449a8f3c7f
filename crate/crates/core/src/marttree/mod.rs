//! Martingale difference sequences on a uniform `N`-ary tree of depth `n`.
//!
//! A node is a path `x_1..x_{k-1}` over `{1..N}`; its branch vector holds
//! `d_k(x_1..x_{k-1}, ·)`. Per-node attachments ([`NodeMap`]) carry the
//! predictable objects: signs, permutations, operators.

mod checks;
mod experiment;
mod generate;
mod norms;
mod pipeline;
mod transform;
mod tree;

pub use checks::{
    check_domination, check_kappa_domination, check_lambda_condition, check_strong_domination,
    check_subordination, KappaReport, KappaSummary,
};
pub use experiment::{
    format_p, full_norm, ratio, run_ratio_experiment, ExperimentReport, MaxRatio, NormValue,
    PairOutcome, RatioConfig, RatioRow, OUTSIDE_RANGE,
};
pub use generate::{
    dominated_pair, global_sign_pair, random_tree, random_zero_sum_contraction, DominatedPair,
    PairKind, PairParams,
};
pub use norms::{
    lp_norm_partial_sum, lp_norm_partial_sum_with, monte_carlo_lp, monte_carlo_lp_with,
    MonteCarloEstimate, NormOptions, BOOTSTRAP_REPLICATES, DEFAULT_ENUMERATION_CAP,
};
pub use pipeline::{proof_pipeline, PipelineReport, PipelineSummary, IDENTITY_TOL};
pub use transform::{
    apply_node_operators, tangent_by_permutation, transform_by_signs, OperatorApplication,
};
pub use tree::{MartingaleTree, NodeId, NodeMap, TreeJson, MAX_TREE_CELLS, ZERO_SUM_TOL};
