use super::tree::{zero_sum_defect, MartingaleTree, NodeMap, ZERO_SUM_TOL};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, Permutation};
use crate::stochmat::{center_cols, center_rows};

fn check_attachment<T>(d: &MartingaleTree, a: &NodeMap<T>) -> Result<()> {
    if a.depth() != d.depth() || a.branching() != d.branching() {
        return Err(Error::format("attachment shape does not match the tree"));
    }
    Ok(())
}

/// Burkholder transform: `e_k = v_k d_k` with a predictable `|v_k| ≤ 1`.
pub fn transform_by_signs(d: &MartingaleTree, v: &NodeMap<f64>) -> Result<MartingaleTree> {
    check_attachment(d, v)?;
    if let Some((node, val)) = v.iter().find(|(_, x)| x.is_nan() || x.abs() > 1.0) {
        return Err(Error::domain(format!(
            "multiplier {val} at node \"{}\" exceeds 1 in absolute value",
            node.path_string(d.branching())
        )));
    }
    MartingaleTree::from_fn(d.depth(), d.branching(), |node| {
        let c = *v.get(node);
        d.branch(node).iter().map(|x| c * x).collect()
    })
}

/// Node-wise rearrangement `e(node)_j = d(node)_{π(j)}`; the result is
/// tangent to `d`.
pub fn tangent_by_permutation(
    d: &MartingaleTree,
    perms: &NodeMap<Permutation>,
) -> Result<MartingaleTree> {
    check_attachment(d, perms)?;
    MartingaleTree::try_from_fn(d.depth(), d.branching(), |node| {
        let p = perms.get(node);
        if p.n() != d.branching() {
            return Err(Error::format(format!(
                "permutation at node \"{}\" has size {}, expected {}",
                node.path_string(d.branching()),
                p.n(),
                d.branching()
            )));
        }
        Ok(p.apply(d.branch(node)))
    })
}

/// Result of [`apply_node_operators`].
#[derive(Debug, Clone)]
pub struct OperatorApplication {
    pub tree: MartingaleTree,
    /// Nodes whose operator was replaced by its row- and column-centred form
    /// because `T d` did not sum to zero.
    pub normalized: Vec<String>,
}

/// `e(node) = T(node) d(node)` for predictable contractions `T`.
///
/// When `T d` fails to sum to zero at a node, the operator is replaced by
/// `center_cols(center_rows(T))`, which yields a zero-sum image; such nodes
/// are listed in the result.
pub fn apply_node_operators(
    d: &MartingaleTree,
    ops: &NodeMap<Matrix>,
    tol: f64,
) -> Result<OperatorApplication> {
    check_attachment(d, ops)?;
    let n = d.branching();
    for (node, t) in ops.iter() {
        if t.n() != n {
            return Err(Error::format(format!(
                "operator at node \"{}\" is {}×{}, expected {n}×{n}",
                node.path_string(n),
                t.n(),
                t.n()
            )));
        }
        let norm = t.contraction_norm();
        if norm > 1.0 + tol {
            return Err(Error::domain(format!(
                "operator at node \"{}\" has row/column absolute sum {norm} > 1",
                node.path_string(n)
            )));
        }
    }
    let mut normalized = Vec::new();
    let tree = MartingaleTree::from_fn(d.depth(), n, |node| {
        let t = ops.get(node);
        let branch = d.branch(node);
        let image = t.mul_vec(branch);
        if zero_sum_defect(&image) <= ZERO_SUM_TOL {
            image
        } else {
            normalized.push(node.path_string(n));
            center_cols(&center_rows(t)).mul_vec(branch)
        }
    })?;
    Ok(OperatorApplication { tree, normalized })
}
