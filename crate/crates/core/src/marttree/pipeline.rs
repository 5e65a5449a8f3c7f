//! Node-by-node replay of the randomized-index argument for operator
//! domination: decompose each `T` into signed permutations, confirm
//! `T d = Σ |θ_i| ε_i P_i d`, sample an index `I` with probability `|θ_I|`,
//! and certify that `h = P_I d` is a rearrangement of `d`.

use rand::Rng as _;
use serde::Serialize;

use super::transform::apply_node_operators;
use super::tree::{MartingaleTree, NodeMap};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{self, tag};
use crate::stochmat::{is_zero_sum_contraction, signed_decompose, SignedPermutationCombination};

/// Identity deviations are allowed up to this times `max(1, ‖d‖_∞)`.
pub const IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct PipelineSummary {
    pub nodes: usize,
    pub max_terms: usize,
    pub max_identity_deviation: f64,
    pub identity_ok: bool,
    pub tangency_ok: bool,
    pub normalized: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    /// `e = T d`, node by node.
    pub e: MartingaleTree,
    /// Sampled `h = P_I d`.
    pub sampled: MartingaleTree,
    /// `ε_I` at each node.
    pub signs: NodeMap<f64>,
    /// Sampled term index `I` at each node.
    pub indices: NodeMap<usize>,
    pub decompositions: NodeMap<SignedPermutationCombination>,
    /// `max_i |(T d)_i − Σ θ_j (P_j d)_i|` at each node.
    pub identity_deviation: NodeMap<f64>,
    pub tangency: NodeMap<bool>,
    pub normalized: Vec<String>,
    scale: f64,
}

impl PipelineReport {
    pub fn identity_ok(&self) -> bool {
        let bound = IDENTITY_TOL * self.scale;
        self.identity_deviation.values().all(|&x| x <= bound)
    }

    pub fn tangency_ok(&self) -> bool {
        self.tangency.all()
    }

    pub fn passes(&self) -> bool {
        self.identity_ok() && self.tangency_ok()
    }

    pub fn summary(&self) -> PipelineSummary {
        PipelineSummary {
            nodes: self.tangency.node_count(),
            max_terms: self.decompositions.values().map(|c| c.terms.len()).max().unwrap_or(0),
            max_identity_deviation: self.identity_deviation.values().fold(0.0, |m, &x| m.max(x)),
            identity_ok: self.identity_ok(),
            tangency_ok: self.tangency_ok(),
            normalized: self.normalized.clone(),
        }
    }
}

fn is_rearrangement(a: &[f64], b: &[f64]) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a == b
}

/// Index `i` drawn with probability `|θ_i| / Σ|θ|`.
fn sample_index(c: &SignedPermutationCombination, u: f64) -> usize {
    let total = c.theta_abs_sum();
    let mut acc = 0.0;
    for (i, t) in c.terms.iter().enumerate() {
        acc += t.theta.abs() / total;
        if u < acc {
            return i;
        }
    }
    c.terms.len() - 1
}

pub fn proof_pipeline(
    d: &MartingaleTree,
    ops: &NodeMap<Matrix>,
    seed: u64,
    tol: f64,
) -> Result<PipelineReport> {
    let n = d.branching();
    if ops.depth() != d.depth() || ops.branching() != n {
        return Err(Error::format("operator map shape does not match the tree"));
    }
    let decompositions = NodeMap::try_from_fn(d.depth(), n, |node| {
        let t = ops.get(node);
        let wrap = |source: Error| Error::Node {
            path: node.path_string(n),
            source: Box::new(source),
        };
        if t.n() != n || !is_zero_sum_contraction(t, tol) {
            return Err(wrap(Error::domain("operator is not a zero-sum contraction")));
        }
        signed_decompose(t, tol).map_err(wrap)
    })?;
    let applied = apply_node_operators(d, ops, tol)?;

    let identity_deviation = decompositions.map(|node, c| {
        let branch = d.branch(node);
        let direct = ops.get(node).mul_vec(branch);
        let mut combined = vec![0.0; n];
        for term in &c.terms {
            let h = term.perm.apply(branch);
            let sign = term.theta.signum();
            for (x, hv) in combined.iter_mut().zip(h) {
                *x += term.theta.abs() * sign * hv;
            }
        }
        direct
            .iter()
            .zip(&combined)
            .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()))
    });

    let indices = decompositions.map(|node, c| {
        let u: f64 = rng::stream(seed, tag::PIPELINE, &[node.level, node.index]).gen();
        sample_index(c, u)
    });
    let signs = indices.map(|node, &i| decompositions.get(node).terms[i].theta.signum());
    let sampled = MartingaleTree::from_fn(d.depth(), n, |node| {
        let term = &decompositions.get(node).terms[*indices.get(node)];
        term.perm.apply(d.branch(node))
    })?;
    let tangency = indices.map(|node, _| is_rearrangement(sampled.branch(node), d.branch(node)));
    let scale = d
        .nodes()
        .flat_map(|node| d.branch(node).iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));

    Ok(PipelineReport {
        e: applied.tree,
        sampled,
        signs,
        indices,
        decompositions,
        identity_deviation,
        tangency,
        normalized: applied.normalized,
        scale,
    })
}
