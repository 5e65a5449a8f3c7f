//! Random instances and brute-force oracles shared by the integration tests.
//! Nothing here calls into the library's own algorithms.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strongdom::{Matrix, Permutation};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_permutation(rng: &mut TestRng, n: usize) -> Permutation {
    let mut image: Vec<usize> = (0..n).collect();
    image.shuffle(rng);
    Permutation::new(image).unwrap()
}

fn add_permutation(m: &mut Matrix, p: &Permutation, w: f64) {
    for (i, &j) in p.image().iter().enumerate() {
        m.set(i, j, m.get(i, j) + w);
    }
}

/// Normalized sum of `1..=max_terms` random permutation matrices.
pub fn random_doubly_stochastic(rng: &mut TestRng, n: usize, max_terms: usize) -> Matrix {
    let k = rng.gen_range(1..=max_terms);
    let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut m = Matrix::zeros(n);
    for wi in w {
        let p = random_permutation(rng, n);
        add_permutation(&mut m, &p, wi / total);
    }
    m
}

/// `Σ θ_i ε_i P_i` with positive and negative weights each summing to `s/2`.
pub fn random_zero_sum_contraction(rng: &mut TestRng, n: usize) -> Matrix {
    let s = rng.gen_range(0.0..=1.0);
    let mut m = Matrix::zeros(n);
    for sign in [1.0, -1.0] {
        let k = rng.gen_range(1..=6);
        let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = w.iter().sum();
        for wi in w {
            let p = random_permutation(rng, n);
            add_permutation(&mut m, &p, sign * s / 2.0 * wi / total);
        }
    }
    m
}

/// Nonnegative, sparse-ish, with largest row/column sum in `(0, 1]`.
pub fn random_sub_doubly_stochastic(rng: &mut TestRng, n: usize) -> Matrix {
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if rng.gen_bool(0.7) {
                m.set(i, j, rng.gen_range(0.0..1.0));
            }
        }
    }
    let peak = row_sums(&m).into_iter().chain(col_sums(&m)).fold(0.0, f64::max);
    if peak == 0.0 {
        return m;
    }
    let target = if rng.gen_bool(0.2) { 1.0 } else { rng.gen_range(0.05..1.0) };
    m.map(|v| v * target / peak)
}

/// Signed entries with row and column absolute sums at most one.
pub fn random_contraction(rng: &mut TestRng, n: usize) -> Matrix {
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if rng.gen_bool(0.6) {
                m.set(i, j, rng.gen_range(-1.0..1.0));
            }
        }
    }
    let norm = abs_row_sums(&m).into_iter().chain(abs_col_sums(&m)).fold(0.0, f64::max);
    if norm == 0.0 {
        return m;
    }
    let target = if rng.gen_bool(0.2) { 1.0 } else { rng.gen_range(0.1..1.0) };
    m.map(|v| v * target / norm)
}

pub fn random_vector(rng: &mut TestRng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

pub fn row_sums(m: &Matrix) -> Vec<f64> {
    (0..m.n()).map(|i| (0..m.n()).map(|j| m.get(i, j)).sum()).collect()
}

pub fn col_sums(m: &Matrix) -> Vec<f64> {
    (0..m.n()).map(|j| (0..m.n()).map(|i| m.get(i, j)).sum()).collect()
}

pub fn abs_row_sums(m: &Matrix) -> Vec<f64> {
    (0..m.n()).map(|i| (0..m.n()).map(|j| m.get(i, j).abs()).sum()).collect()
}

pub fn abs_col_sums(m: &Matrix) -> Vec<f64> {
    (0..m.n()).map(|j| (0..m.n()).map(|i| m.get(i, j).abs()).sum()).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn mat_vec(m: &Matrix, x: &[f64]) -> Vec<f64> {
    (0..m.n()).map(|i| (0..m.n()).map(|j| m.get(i, j) * x[j]).sum()).collect()
}

/// `Σ θ_i P_i` with `(P_i)_{r, π(r)} = 1`.
pub fn combine(n: usize, terms: &[(f64, Vec<usize>)]) -> Matrix {
    let mut m = Matrix::zeros(n);
    for (theta, image) in terms {
        for (r, &c) in image.iter().enumerate() {
            m.set(r, c, m.get(r, c) + theta);
        }
    }
    m
}

pub fn is_bijection(image: &[usize]) -> bool {
    let mut seen = vec![false; image.len()];
    image
        .iter()
        .all(|&j| j < image.len() && !std::mem::replace(&mut seen[j], true))
}

/// `E(|f| − c)_+ + t c`, minimised over `c ∈ {0} ∪ |f|`: the integral of the
/// decreasing rearrangement over `[0, t]` by duality, without sorting.
pub fn k_oracle(values: &[f64], t: f64) -> f64 {
    let n = values.len() as f64;
    std::iter::once(0.0)
        .chain(values.iter().map(|v| v.abs()))
        .map(|c| values.iter().map(|v| (v.abs() - c).max(0.0)).sum::<f64>() / n + t * c)
        .fold(f64::INFINITY, f64::min)
}

/// Largest sum of `k` absolute values, by trying every `k`-subset.
pub fn top_k_sum_by_subsets(values: &[f64], k: usize) -> f64 {
    let n = values.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == k {
            let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| values[i].abs()).sum();
            best = best.max(s);
        }
    }
    best
}

/// Equal-length vectors: `g` weakly majorized by `f`, by subset enumeration.
pub fn majorized_by_subsets(f: &[f64], g: &[f64], tol: f64) -> bool {
    (1..=f.len()).all(|k| top_k_sum_by_subsets(g, k) <= top_k_sum_by_subsets(f, k) + tol)
}

/// `E[λ ∨ |f|]`.
pub fn lambda_oracle(values: &[f64], lambda: f64) -> f64 {
    values.iter().map(|v| v.abs().max(lambda)).sum::<f64>() / values.len() as f64
}

/// `(E|x|^p)^{1/p}` or the max.
pub fn lp(values: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        values.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        (values.iter().map(|v| v.abs().powf(p)).sum::<f64>() / values.len() as f64).powf(1.0 / p)
    }
}

/// Partial sums `Σ_{j≤depth} d_j` on every path, by walking the tree.
pub fn path_sums(t: &strongdom::marttree::MartingaleTree) -> Vec<f64> {
    use strongdom::marttree::NodeId;
    fn walk(
        t: &strongdom::marttree::MartingaleTree,
        level: usize,
        index: usize,
        acc: f64,
        out: &mut Vec<f64>,
    ) {
        let branch = t.branch(NodeId { level, index });
        for (c, v) in branch.iter().enumerate() {
            if level + 1 == t.depth() {
                out.push(acc + v);
            } else {
                walk(t, level + 1, index * t.branching() + c, acc + v, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(t, 0, 0, 0.0, &mut out);
    out
}

/// `∫_0^t f#` for a grid function, from its absolute values sorted here.
pub fn k_sorted(values: &[f64], t: f64) -> f64 {
    let mut a: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    a.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let n = a.len() as f64;
    let x = (t * n).min(n);
    let whole = x.floor() as usize;
    let head: f64 = a[..whole].iter().sum();
    let frac = if whole < a.len() { (x - whole as f64) * a[whole] } else { 0.0 };
    (head + frac) / n
}
