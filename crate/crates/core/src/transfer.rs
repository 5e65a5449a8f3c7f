//! Transfer operators between weakly majorized vectors.
//!
//! For `n`-vectors with `Σ_{k≤m} g#_k ≤ Σ_{k≤m} f#_k` for all `m`, there is a
//! matrix `T` with `Tf = g` whose row and column absolute sums are at most one.
//! [`construct_transfer`] builds one as a product of five factors, each of
//! which is itself such a contraction:
//!
//! 1. a signed permutation taking `f` to `f#`;
//! 2. (no factor) a lift `h ≥ g#` with `h` majorized by `f#` and
//!    `Σ h = Σ f#`, obtained by raising the tail of `g#` to a common level;
//! 3. a doubly stochastic `D` with `D f# = h`, built from at most `n − 1`
//!    T-transforms `λ I + (1 − λ) P_{jk}`;
//! 4. a diagonal `Λ` with `Λ_ii = g#_i / h_i`;
//! 5. a signed permutation taking `g#` to `g`.
//!
//! The converse, that any such `T` gives `Tf` weakly majorized by `f`, is
//! checked by [`verify_only_if`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Permutation};
use crate::rearrange::{rearrangement_order, sorted_abs, weakly_majorizes, StepFunction};

/// `λ I + (1 − λ) P` where `P` swaps coordinates `j < k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTransform {
    pub j: usize,
    pub k: usize,
    pub lambda: f64,
}

impl TTransform {
    pub fn to_matrix(&self, n: usize) -> Matrix {
        let mut m = Matrix::identity(n);
        let mu = 1.0 - self.lambda;
        m.set(self.j, self.j, self.lambda);
        m.set(self.k, self.k, self.lambda);
        m.set(self.j, self.k, mu);
        m.set(self.k, self.j, mu);
        m
    }

    fn apply(&self, x: &mut [f64]) {
        let (a, b) = (x[self.j], x[self.k]);
        let mu = 1.0 - self.lambda;
        x[self.j] = self.lambda * a + mu * b;
        x[self.k] = mu * a + self.lambda * b;
    }
}

/// The individual factors of a transfer operator, `T = G Λ D F`.
#[derive(Debug, Clone)]
pub struct TransferFactors {
    /// Signed permutation with `F f = f#`.
    pub to_sorted: Matrix,
    /// Lift of `g#` majorized by `f#`.
    pub lifted: Vec<f64>,
    pub chain: Vec<TTransform>,
    /// Product of the chain, `D f# = lifted`.
    pub doubly_stochastic: Matrix,
    /// Diagonal shrink `Λ`.
    pub shrink: Matrix,
    /// Signed permutation with `G g# = g`.
    pub from_sorted: Matrix,
}

impl TransferFactors {
    pub fn compose(&self) -> Matrix {
        self.from_sorted
            .matmul(&self.shrink)
            .matmul(&self.doubly_stochastic)
            .matmul(&self.to_sorted)
    }

    pub fn matrices(&self) -> [&Matrix; 4] {
        [&self.to_sorted, &self.doubly_stochastic, &self.shrink, &self.from_sorted]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferCertificate {
    pub matrix: Matrix,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub max_row_abs_sum: f64,
    pub max_col_abs_sum: f64,
    /// `‖Tf − g‖_∞`.
    pub residual: f64,
    pub chain_length: usize,
}

/// First `m` (1-based) where `Σ_{k≤m} g#_k > Σ_{k≤m} f#_k + tol`.
pub fn first_violation(f: &[f64], g: &[f64], tol: f64) -> Option<(usize, f64, f64)> {
    let fs = sorted_abs(f);
    let gs = sorted_abs(g);
    let (mut sf, mut sg) = (0.0, 0.0);
    for (m, (a, b)) in fs.iter().zip(&gs).enumerate() {
        sf += a;
        sg += b;
        if sg > sf + tol {
            return Some((m + 1, sg, sf));
        }
    }
    None
}

/// Raises the tail of `g_sorted` to a common level so the total matches
/// `target`. The result stays non-increasing and is majorized by any
/// non-increasing vector of total `target` whose partial sums dominate those
/// of `g_sorted`.
pub fn water_fill(g_sorted: &[f64], target: f64) -> Vec<f64> {
    let n = g_sorted.len();
    let total: f64 = g_sorted.iter().sum();
    if target <= total {
        return g_sorted.to_vec();
    }
    let slack = 1e-15 * (1.0 + target.abs());
    let mut head = total;
    for tail in 1..=n {
        let r = n - tail;
        head -= g_sorted[r];
        let level = (target - head) / tail as f64;
        let raises_tail = level >= g_sorted[r] - slack;
        let keeps_head = r == 0 || level <= g_sorted[r - 1] + slack;
        if raises_tail && keeps_head {
            let mut h = g_sorted.to_vec();
            h[r..].iter_mut().for_each(|v| *v = level);
            return h;
        }
    }
    vec![target / n as f64; n]
}

/// T-transforms carrying the non-increasing `from` to `to` (`to` majorized by
/// `from`, equal totals). Uses the largest-index-mismatch rule, so at most
/// `n − 1` transforms are produced.
pub fn t_transform_chain(from: &[f64], to: &[f64]) -> Vec<TTransform> {
    let n = from.len();
    let scale = from.iter().chain(to).fold(0.0f64, |m, v| m.max(v.abs()));
    let eps = 1e-13 * scale.max(f64::MIN_POSITIVE);
    let mut x = from.to_vec();
    let mut chain = Vec::new();
    while chain.len() < n.saturating_sub(1) {
        let Some(j) = (0..n).rev().find(|&i| x[i] > to[i] + eps) else {
            break;
        };
        let Some(k) = (j + 1..n).find(|&i| x[i] < to[i] - eps) else {
            break;
        };
        let delta = (x[j] - to[j]).min(to[k] - x[k]);
        let lambda = 1.0 - delta / (x[j] - x[k]);
        let t = TTransform { j, k, lambda };
        t.apply(&mut x);
        if x[j] - to[j] <= eps {
            x[j] = to[j];
        }
        if to[k] - x[k] <= eps {
            x[k] = to[k];
        }
        chain.push(t);
    }
    chain
}

/// Builds the factors of a transfer operator from `f` to `g`.
pub fn transfer_factors(f: &[f64], g: &[f64], tol: f64) -> Result<TransferFactors> {
    let n = f.len();
    if g.len() != n {
        return Err(Error::format(format!("f has {n} entries but g has {}", g.len())));
    }
    if n == 0 {
        return Err(Error::format("vectors must be nonempty"));
    }
    if f.iter().chain(g).any(|v| !v.is_finite()) {
        return Err(Error::format("non-finite entry"));
    }
    if let Some((index, lhs, rhs)) = first_violation(f, g, tol) {
        return Err(Error::NotMajorized { index, lhs, rhs });
    }

    let f_order = rearrangement_order(f);
    let f_sorted: Vec<f64> = f_order.iter().map(|&i| f[i].abs()).collect();
    let mut to_sorted = Matrix::zeros(n);
    for (k, &i) in f_order.iter().enumerate() {
        to_sorted.set(k, i, if f[i] < 0.0 { -1.0 } else { 1.0 });
    }

    let g_order = rearrangement_order(g);
    let g_sorted: Vec<f64> = g_order.iter().map(|&i| g[i].abs()).collect();
    let mut from_sorted = Matrix::zeros(n);
    for (k, &i) in g_order.iter().enumerate() {
        from_sorted.set(i, k, if g[i] < 0.0 { -1.0 } else { 1.0 });
    }

    // Within tolerance the partial sums may exceed slightly; shrink g# so the
    // domination is exact and the factors stay contractions.
    let (mut sf, mut sg, mut shrink_all) = (0.0, 0.0, 1.0f64);
    for (a, b) in f_sorted.iter().zip(&g_sorted) {
        sf += a;
        sg += b;
        if sg > sf {
            shrink_all = shrink_all.min(sf / sg);
        }
    }
    let target_sorted: Vec<f64> = g_sorted.iter().map(|v| v * shrink_all).collect();

    let total: f64 = f_sorted.iter().sum();
    let lifted = water_fill(&target_sorted, total);
    let chain = t_transform_chain(&f_sorted, &lifted);
    let doubly_stochastic = chain
        .iter()
        .fold(Matrix::identity(n), |acc, t| t.to_matrix(n).matmul(&acc));

    let mut shrink = Matrix::identity(n);
    for (i, (&t, &h)) in target_sorted.iter().zip(&lifted).enumerate() {
        if h > 0.0 {
            shrink.set(i, i, (t / h).clamp(0.0, 1.0));
        }
    }

    Ok(TransferFactors {
        to_sorted,
        lifted,
        chain,
        doubly_stochastic,
        shrink,
        from_sorted,
    })
}

/// Matrix `T` with `Tf = g` and row/column absolute sums at most one.
///
/// Fails with [`Error::NotMajorized`] when some partial sum of `g#` exceeds
/// that of `f#` by more than `tol`.
pub fn construct_transfer(f: &[f64], g: &[f64], tol: f64) -> Result<TransferCertificate> {
    let factors = transfer_factors(f, g, tol)?;
    let matrix = factors.compose();
    let image = matrix.mul_vec(f);
    let residual = image
        .iter()
        .zip(g)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(TransferCertificate {
        max_row_abs_sum: matrix.max_row_abs_sum(),
        max_col_abs_sum: matrix.max_col_abs_sum(),
        matrix,
        f: f.to_vec(),
        g: g.to_vec(),
        residual,
        chain_length: factors.chain.len(),
    })
}

/// Checks that `Tf` is weakly majorized by `f` for a contraction `T`.
pub fn verify_only_if(t: &Matrix, f: &[f64], tol: f64) -> Result<bool> {
    if t.n() != f.len() {
        return Err(Error::format(format!(
            "matrix is {}×{} but f has {} entries",
            t.n(),
            t.n(),
            f.len()
        )));
    }
    let norm = t.contraction_norm();
    if norm > 1.0 + tol {
        return Err(Error::domain(format!(
            "row/column absolute sums reach {norm}, above 1 + tol"
        )));
    }
    let image = t.mul_vec(f);
    let f = StepFunction::new(f.to_vec())?;
    let image = StepFunction::new(image)?;
    Ok(weakly_majorizes(&f, &image, tol))
}

/// Permutation matrices are the equality case: `Pf` and `f` have the same
/// rearrangement.
pub fn permutation_preserves_rearrangement(p: &Permutation, f: &[f64]) -> bool {
    sorted_abs(&p.apply(f)) == sorted_abs(f)
}
