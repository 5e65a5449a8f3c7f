//! Node-wise hypothesis checks between two trees of the same shape.
//!
//! Implication chain tested across the crate:
//! subordination ⟹ strong domination ⟹ weak majorization of rearrangements
//! ⟺ the `λ ∨` condition.

use serde::Serialize;

use super::tree::{MartingaleTree, NodeId, NodeMap};
use crate::error::Result;
use crate::rearrange::{lambda_margin, sorted_abs, weakly_majorizes, StepFunction};

fn node_map(
    d: &MartingaleTree,
    e: &MartingaleTree,
    mut f: impl FnMut(&[f64], &[f64]) -> bool,
) -> Result<NodeMap<bool>> {
    d.same_shape(e)?;
    NodeMap::from_fn(d.depth(), d.branching(), |node: NodeId| f(d.branch(node), e.branch(node)))
}

fn step(values: &[f64]) -> StepFunction {
    StepFunction::new(values.to_vec()).expect("tree branches are finite and nonempty")
}

/// `∫_0^t e# ≤ ∫_0^t d# + tol` for all `t`, at every node.
pub fn check_domination(d: &MartingaleTree, e: &MartingaleTree, tol: f64) -> Result<NodeMap<bool>> {
    node_map(d, e, |db, eb| weakly_majorizes(&step(db), &step(eb), tol))
}

/// `E[λ ∨ |e_k| | node] ≤ E[λ ∨ |d_k| | node] + tol` for all `λ ≥ 0`.
pub fn check_lambda_condition(
    d: &MartingaleTree,
    e: &MartingaleTree,
    tol: f64,
) -> Result<NodeMap<bool>> {
    node_map(d, e, |db, eb| lambda_margin(&step(db), &step(eb)) <= tol)
}

/// Pointwise `|e| ≤ |d|` at every cell.
pub fn check_subordination(d: &MartingaleTree, e: &MartingaleTree) -> Result<NodeMap<bool>> {
    node_map(d, e, |db, eb| db.iter().zip(eb).all(|(a, b)| b.abs() <= a.abs()))
}

/// `#{i : |v_i| > λ}` for sorted non-increasing `sorted`.
fn tail_count(sorted: &[f64], lambda: f64) -> usize {
    sorted.partition_point(|&v| v > lambda)
}

/// Compares tail counts on the merged level set; `scale` multiplies the
/// count of `d`.
fn tail_dominated(db: &[f64], eb: &[f64], scale: f64) -> bool {
    let ds = sorted_abs(db);
    let es = sorted_abs(eb);
    ds.iter().chain(&es).all(|&lambda| {
        tail_count(&es, lambda) as f64 <= scale * tail_count(&ds, lambda) as f64
    })
}

/// Conditional tail domination
/// `#{i : |e_i| > λ} ≤ #{i : |d_i| > λ}` for every level `λ` at every node.
pub fn check_strong_domination(d: &MartingaleTree, e: &MartingaleTree) -> Result<NodeMap<bool>> {
    node_map(d, e, |db, eb| tail_dominated(db, eb, 1.0))
}

/// Both sides of the `κ`-scaled domination argument.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaReport {
    pub kappa: f64,
    /// `#{|e| > λ} ≤ κ · #{|d| > λ}` at every level.
    pub tail_hypothesis: NodeMap<bool>,
    /// `∫_0^t e# ≤ ∫_0^t (κ|d|)#` for every `t`.
    pub scaled_domination: NodeMap<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaSummary {
    pub kappa: f64,
    pub tail_hypothesis: bool,
    pub scaled_domination: bool,
    pub passes: bool,
}

impl KappaReport {
    /// Every node satisfies the scaled domination that the inequality
    /// `‖Σe‖_p ≤ κ c_p ‖Σd‖_p` rests on, and no node has the tail hypothesis
    /// without its consequence.
    pub fn passes(&self) -> bool {
        self.scaled_domination.all()
            && self
                .tail_hypothesis
                .values()
                .zip(self.scaled_domination.values())
                .all(|(&h, &c)| !h || c)
    }

    pub fn summary(&self) -> KappaSummary {
        KappaSummary {
            kappa: self.kappa,
            tail_hypothesis: self.tail_hypothesis.all(),
            scaled_domination: self.scaled_domination.all(),
            passes: self.passes(),
        }
    }
}

pub fn check_kappa_domination(
    d: &MartingaleTree,
    e: &MartingaleTree,
    kappa: f64,
    tol: f64,
) -> Result<KappaReport> {
    if kappa.is_nan() || kappa < 1.0 {
        return Err(crate::Error::domain(format!("κ = {kappa} must be at least 1")));
    }
    let tail_hypothesis = node_map(d, e, |db, eb| tail_dominated(db, eb, kappa))?;
    let scaled = d.scale(kappa);
    let scaled_domination = check_domination(&scaled, e, tol)?;
    Ok(KappaReport {
        kappa,
        tail_hypothesis,
        scaled_domination,
    })
}
