//! Random trees and pairs `(d, e)` that satisfy a domination hypothesis by
//! construction.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::checks::{check_domination, check_kappa_domination, check_subordination};
use super::transform::{apply_node_operators, tangent_by_permutation, transform_by_signs};
use super::tree::{MartingaleTree, NodeId, NodeMap};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, Permutation};
use crate::rng::{self, tag, Rng};

fn node_stream(seed: u64, tag: u64, node: NodeId) -> Rng {
    rng::stream(seed, tag, &[node.level, node.index])
}

/// Branch values drawn from `U[-1, 1]` and centred.
pub fn random_tree(depth: usize, branching: usize, seed: u64) -> Result<MartingaleTree> {
    MartingaleTree::from_fn(depth, branching, |node| {
        let mut rng = node_stream(seed, tag::TREE, node);
        let mut v: Vec<f64> = (0..branching).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let mean = v.iter().sum::<f64>() / branching as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        v
    })
}

fn random_permutation(rng: &mut Rng, n: usize) -> Permutation {
    let mut image: Vec<usize> = (0..n).collect();
    image.shuffle(rng);
    Permutation::new(image).expect("shuffle of 0..n")
}

/// Weights `w_1..w_m > 0` with `Σ w = total`.
fn random_weights(rng: &mut Rng, m: usize, total: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|w| total * w / s).collect()
}

/// `Σ θ_i ε_i P_i` whose positive and negative parts each carry weight `s/2`
/// for a random `s ∈ (0.2, 1]`. Row and column sums vanish and
/// `|M| ≤ Σ |θ_i| P_i` has row and column sums at most `s ≤ 1`.
pub fn random_zero_sum_contraction(rng: &mut Rng, n: usize) -> Matrix {
    let s: f64 = rng.gen_range(0.2..=1.0);
    let mut m = Matrix::zeros(n);
    for sign in [1.0, -1.0] {
        let count = rng.gen_range(1..=4);
        for w in random_weights(rng, count, s / 2.0) {
            let p = random_permutation(rng, n);
            for (i, &j) in p.image().iter().enumerate() {
                m.set(i, j, m.get(i, j) + sign * w);
            }
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    /// `e = v d` with predictable `v ∈ [-1, 1]`.
    Subordinate,
    /// Node-wise random permutations of `d`.
    Tangent,
    /// Node-wise random zero-sum contractions applied to `d`.
    Operator,
    /// `κ` times a tangent copy of `d`.
    Kappa,
}

impl PairKind {
    pub const ALL: [PairKind; 4] = [
        PairKind::Subordinate,
        PairKind::Tangent,
        PairKind::Operator,
        PairKind::Kappa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PairKind::Subordinate => "subordinate",
            PairKind::Tangent => "tangent",
            PairKind::Operator => "operator",
            PairKind::Kappa => "kappa",
        }
    }
}

impl fmt::Display for PairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PairKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PairKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::Usage(format!(
                    "unknown generator {s:?}; expected subordinate, tangent, operator or kappa"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairParams {
    pub depth: usize,
    pub branching: usize,
    /// Only used by [`PairKind::Kappa`].
    pub kappa: f64,
}

impl PairParams {
    pub fn new(depth: usize, branching: usize) -> Self {
        Self {
            depth,
            branching,
            kappa: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DominatedPair {
    pub kind: PairKind,
    pub d: MartingaleTree,
    pub e: MartingaleTree,
    /// The node operators, for [`PairKind::Operator`].
    pub operators: Option<NodeMap<Matrix>>,
    pub kappa: f64,
}

impl DominatedPair {
    /// The node-wise check matching the construction: subordination,
    /// equal rearrangements, rearrangement-integral domination, or the
    /// `κ`-scaled report.
    pub fn hypothesis(&self, tol: f64) -> Result<NodeMap<bool>> {
        match self.kind {
            PairKind::Subordinate => check_subordination(&self.d, &self.e),
            PairKind::Tangent | PairKind::Operator => check_domination(&self.d, &self.e, tol),
            PairKind::Kappa => {
                Ok(check_kappa_domination(&self.d, &self.e, self.kappa, tol)?.scaled_domination)
            }
        }
    }
}

pub fn dominated_pair(kind: PairKind, params: PairParams, seed: u64) -> Result<DominatedPair> {
    let PairParams {
        depth,
        branching,
        kappa,
    } = params;
    let d = random_tree(depth, branching, seed)?;
    let mut operators = None;
    let e = match kind {
        PairKind::Subordinate => {
            let v = NodeMap::from_fn(depth, branching, |node| {
                node_stream(seed, tag::SIGNS, node).gen_range(-1.0..=1.0)
            })?;
            transform_by_signs(&d, &v)?
        }
        PairKind::Tangent | PairKind::Kappa => {
            if kind == PairKind::Kappa && (kappa.is_nan() || kappa < 1.0) {
                return Err(Error::domain(format!("κ = {kappa} must be at least 1")));
            }
            let perms = NodeMap::from_fn(depth, branching, |node| {
                random_permutation(&mut node_stream(seed, tag::PERMS, node), branching)
            })?;
            let t = tangent_by_permutation(&d, &perms)?;
            if kind == PairKind::Kappa {
                t.scale(kappa)
            } else {
                t
            }
        }
        PairKind::Operator => {
            let ops = NodeMap::from_fn(depth, branching, |node| {
                random_zero_sum_contraction(&mut node_stream(seed, tag::OPERATORS, node), branching)
            })?;
            let e = apply_node_operators(&d, &ops, crate::DEFAULT_TOL)?.tree;
            operators = Some(ops);
            e
        }
    };
    Ok(DominatedPair {
        kind,
        d,
        e,
        operators,
        kappa: if kind == PairKind::Kappa { kappa } else { 1.0 },
    })
}

/// `e = ε d` for a single random sign `ε`: an exact isometry of every norm.
pub fn global_sign_pair(depth: usize, branching: usize, seed: u64) -> Result<(MartingaleTree, MartingaleTree)> {
    let d = random_tree(depth, branching, seed)?;
    let sign = if rng::stream(seed, tag::GLOBAL_SIGN, &[]).gen::<bool>() {
        1.0
    } else {
        -1.0
    };
    let v = NodeMap::constant(depth, branching, sign)?;
    let e = transform_by_signs(&d, &v)?;
    Ok((d, e))
}
