use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A node of the uniform tree: `level` is the number of coordinates already
/// revealed (0 for the root), `index` the base-`N` encoding of that prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub level: usize,
    pub index: usize,
}

impl NodeId {
    /// Prefix digits `x_1..x_level`, each in `0..branching`.
    pub fn path(&self, branching: usize) -> Vec<usize> {
        let mut digits = vec![0; self.level];
        let mut rest = self.index;
        for d in digits.iter_mut().rev() {
            *d = rest % branching;
            rest /= branching;
        }
        digits
    }

    /// 1-based digits joined by dots; the root is the empty string.
    pub fn path_string(&self, branching: usize) -> String {
        self.path(branching)
            .iter()
            .map(|d| (d + 1).to_string())
            .collect::<Vec<_>>()
            .join(".")
    }

    pub fn parse(path: &str, depth: usize, branching: usize) -> Result<Self> {
        if path.is_empty() {
            return Ok(NodeId { level: 0, index: 0 });
        }
        let mut index = 0usize;
        let mut level = 0;
        for part in path.split('.') {
            let d: usize = part
                .parse()
                .map_err(|_| Error::format(format!("bad path component {part:?} in {path:?}")))?;
            if d == 0 || d > branching {
                return Err(Error::format(format!("path {path:?}: digit {d} outside 1..={branching}")));
            }
            index = index * branching + (d - 1);
            level += 1;
        }
        if level >= depth {
            return Err(Error::format(format!("path {path:?} is too long for depth {depth}")));
        }
        Ok(NodeId { level, index })
    }
}

/// Largest supported number of leaf cells `N^depth`.
pub const MAX_TREE_CELLS: usize = 1 << 26;

fn level_sizes(depth: usize, branching: usize) -> Result<Vec<usize>> {
    let mut sizes = Vec::with_capacity(depth);
    let mut count = 1usize;
    for _ in 0..depth {
        sizes.push(count);
        count = count
            .checked_mul(branching)
            .filter(|&c| c <= MAX_TREE_CELLS)
            .ok_or_else(|| {
                Error::domain(format!(
                    "a tree of depth {depth} and branching {branching} exceeds {MAX_TREE_CELLS} cells"
                ))
            })?;
    }
    Ok(sizes)
}

/// One value per internal node, keyed by the path to the node.
///
/// Values depend only on the prefix, which is exactly predictability with
/// respect to the tree filtration.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMap<T> {
    depth: usize,
    branching: usize,
    levels: Vec<Vec<T>>,
}

impl<T> NodeMap<T> {
    pub fn from_fn(depth: usize, branching: usize, mut f: impl FnMut(NodeId) -> T) -> Result<Self> {
        let levels = level_sizes(depth, branching)?
            .into_iter()
            .enumerate()
            .map(|(level, size)| (0..size).map(|index| f(NodeId { level, index })).collect())
            .collect();
        Ok(Self {
            depth,
            branching,
            levels,
        })
    }

    pub fn try_from_fn(
        depth: usize,
        branching: usize,
        mut f: impl FnMut(NodeId) -> Result<T>,
    ) -> Result<Self> {
        let mut levels = Vec::with_capacity(depth);
        for (level, size) in level_sizes(depth, branching)?.into_iter().enumerate() {
            let mut row = Vec::with_capacity(size);
            for index in 0..size {
                row.push(f(NodeId { level, index })?);
            }
            levels.push(row);
        }
        Ok(Self {
            depth,
            branching,
            levels,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    pub fn get(&self, node: NodeId) -> &T {
        &self.levels[node.level][node.index]
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.levels.iter().enumerate().flat_map(|(level, row)| {
            (0..row.len()).map(move |index| NodeId { level, index })
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &T)> {
        self.nodes().zip(self.levels.iter().flatten())
    }

    pub fn values(&self) -> impl Iterator<Item = &T> {
        self.levels.iter().flatten()
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn map<U>(&self, mut f: impl FnMut(NodeId, &T) -> U) -> NodeMap<U> {
        NodeMap {
            depth: self.depth,
            branching: self.branching,
            levels: self
                .levels
                .iter()
                .enumerate()
                .map(|(level, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(index, v)| f(NodeId { level, index }, v))
                        .collect()
                })
                .collect(),
        }
    }
}

impl<T: Clone> NodeMap<T> {
    pub fn constant(depth: usize, branching: usize, value: T) -> Result<Self> {
        Self::from_fn(depth, branching, |_| value.clone())
    }
}

impl NodeMap<bool> {
    pub fn all(&self) -> bool {
        self.values().all(|&b| b)
    }

    /// Paths of the nodes where the flag is false.
    pub fn failures(&self) -> Vec<String> {
        self.iter()
            .filter(|(_, &ok)| !ok)
            .map(|(node, _)| node.path_string(self.branching))
            .collect()
    }
}

/// A martingale difference sequence on the uniform `N`-ary tree of depth `n`.
///
/// The step-`k` increment on the cell `x_1..x_k` is stored in
/// `levels[k-1][index(x_1..x_k)]`, so the branch vector of the node
/// `x_1..x_{k-1}` is a contiguous slice of length `N`. Every branch vector
/// sums to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleTree {
    depth: usize,
    branching: usize,
    levels: Vec<Vec<f64>>,
}

/// JSON form: `{"depth": n, "branching": N, "nodes": {"2.1": [...], ...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeJson {
    pub depth: usize,
    pub branching: usize,
    pub nodes: BTreeMap<String, Vec<f64>>,
}

/// Branch vectors may sum to `1e-12 · (1 + Σ|v|)` without being rejected.
pub const ZERO_SUM_TOL: f64 = 1e-12;

pub(crate) fn zero_sum_defect(branch: &[f64]) -> f64 {
    let sum: f64 = branch.iter().sum();
    let scale: f64 = 1.0 + branch.iter().map(|v| v.abs()).sum::<f64>();
    sum.abs() / scale
}

impl MartingaleTree {
    pub fn from_fn(
        depth: usize,
        branching: usize,
        mut f: impl FnMut(NodeId) -> Vec<f64>,
    ) -> Result<Self> {
        Self::try_from_fn(depth, branching, |node| Ok(f(node)))
    }

    pub fn try_from_fn(
        depth: usize,
        branching: usize,
        mut f: impl FnMut(NodeId) -> Result<Vec<f64>>,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(Error::domain("depth must be at least 1"));
        }
        if branching < 2 {
            return Err(Error::domain("branching must be at least 2"));
        }
        let mut levels = Vec::with_capacity(depth);
        for (level, size) in level_sizes(depth, branching)?.into_iter().enumerate() {
            let mut row = Vec::with_capacity(size * branching);
            for index in 0..size {
                let node = NodeId { level, index };
                let branch = f(node)?;
                if branch.len() != branching {
                    return Err(Error::format(format!(
                        "node \"{}\" has {} branch values, expected {branching}",
                        node.path_string(branching),
                        branch.len()
                    )));
                }
                if branch.iter().any(|v| !v.is_finite()) {
                    return Err(Error::format(format!(
                        "node \"{}\" has a non-finite value",
                        node.path_string(branching)
                    )));
                }
                if zero_sum_defect(&branch) > ZERO_SUM_TOL {
                    return Err(Error::domain(format!(
                        "node \"{}\" branch values do not sum to zero",
                        node.path_string(branching)
                    )));
                }
                row.extend(branch);
            }
            levels.push(row);
        }
        Ok(Self {
            depth,
            branching,
            levels,
        })
    }

    pub fn zeros(depth: usize, branching: usize) -> Result<Self> {
        Self::from_fn(depth, branching, |_| vec![0.0; branching])
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    pub fn branch(&self, node: NodeId) -> &[f64] {
        let n = self.branching;
        &self.levels[node.level][node.index * n..(node.index + 1) * n]
    }

    /// Increments of step `k` (1-based) indexed by the full path `x_1..x_k`.
    pub fn increments(&self, k: usize) -> &[f64] {
        &self.levels[k - 1]
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        let n = self.branching;
        self.levels.iter().enumerate().flat_map(move |(level, row)| {
            (0..row.len() / n).map(move |index| NodeId { level, index })
        })
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(|r| r.len() / self.branching).sum()
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.depth != other.depth || self.branching != other.branching {
            return Err(Error::format(format!(
                "tree shapes differ: depth {} / branching {} vs depth {} / branching {}",
                self.depth, self.branching, other.depth, other.branching
            )));
        }
        Ok(())
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            depth: self.depth,
            branching: self.branching,
            levels: self
                .levels
                .iter()
                .map(|r| r.iter().map(|v| c * v).collect())
                .collect(),
        }
    }

    /// Largest `|E[d_k | F_{k-1}]|` over all nodes.
    pub fn max_conditional_mean(&self) -> f64 {
        self.nodes()
            .map(|node| {
                let b = self.branch(node);
                (b.iter().sum::<f64>() / b.len() as f64).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> TreeJson {
        TreeJson {
            depth: self.depth,
            branching: self.branching,
            nodes: self
                .nodes()
                .map(|node| (node.path_string(self.branching), self.branch(node).to_vec()))
                .collect(),
        }
    }

    pub fn from_json(json: &TreeJson) -> Result<Self> {
        let mut by_node = std::collections::HashMap::with_capacity(json.nodes.len());
        for (path, values) in &json.nodes {
            let node = NodeId::parse(path, json.depth, json.branching)?;
            if by_node.insert(node, values).is_some() {
                return Err(Error::format(format!("duplicate node {path:?}")));
            }
        }
        let tree = Self::try_from_fn(json.depth, json.branching, |node| {
            by_node.get(&node).map(|v| v.to_vec()).ok_or_else(|| {
                Error::format(format!("missing node \"{}\"", node.path_string(json.branching)))
            })
        })?;
        if by_node.len() != tree.node_count() {
            return Err(Error::format("tree JSON has extra nodes"));
        }
        Ok(tree)
    }
}
