//! Doubly stochastic, sub-doubly stochastic and zero-sum contraction matrices.
//!
//! The decompositions are constructive:
//!
//! * [`birkhoff_decompose`] peels permutations off a doubly stochastic matrix.
//!   Each round picks the permutation whose smallest entry is largest (a
//!   bottleneck perfect matching found with augmenting paths) and subtracts
//!   that smallest entry, which zeroes at least one entry of the residual.
//! * [`embed_double`] places a sub-doubly stochastic `M` in the upper-left
//!   corner of a `2n × 2n` doubly stochastic matrix.
//! * [`complete_to_double`] finds a sub-doubly stochastic `N` with `M + N`
//!   doubly stochastic by truncating the Birkhoff terms of the embedding.
//! * [`signed_decompose`] writes a zero-sum contraction as `Σ θ_i P_i` with
//!   `Σ θ_i = 0` and `Σ |θ_i| = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Permutation};

/// Residual entries at or below this are treated as exhausted.
const RESIDUAL_ZERO: f64 = 1e-12;
/// Entries that drop to this level after a subtraction are set to zero.
const DUST: f64 = 1e-15;
/// Signed-decomposition terms below this magnitude are dropped.
const DROP_THETA: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixClass {
    DoublyStochastic,
    SubDoublyStochastic,
    ZeroSumContraction,
    General,
}

/// A square matrix together with its most specific classification.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionMatrix {
    matrix: Matrix,
    class: MatrixClass,
    tol: f64,
}

impl ContractionMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn class(&self) -> MatrixClass {
        self.class
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }
}

pub fn is_doubly_stochastic(m: &Matrix, tol: f64) -> bool {
    m.as_slice().iter().all(|&v| v >= -tol)
        && m.row_sums().iter().chain(&m.col_sums()).all(|s| (s - 1.0).abs() <= tol)
}

pub fn is_sub_doubly_stochastic(m: &Matrix, tol: f64) -> bool {
    m.as_slice().iter().all(|&v| v >= -tol)
        && m.row_sums().iter().chain(&m.col_sums()).all(|&s| s <= 1.0 + tol)
}

/// Zero row and column sums, and `|M|` sub-doubly stochastic.
pub fn is_zero_sum_contraction(m: &Matrix, tol: f64) -> bool {
    m.row_sums().iter().chain(&m.col_sums()).all(|s| s.abs() <= tol)
        && is_sub_doubly_stochastic(&m.abs(), tol)
}

pub fn classify(m: Matrix, tol: f64) -> ContractionMatrix {
    let class = if is_doubly_stochastic(&m, tol) {
        MatrixClass::DoublyStochastic
    } else if is_sub_doubly_stochastic(&m, tol) {
        MatrixClass::SubDoublyStochastic
    } else if is_zero_sum_contraction(&m, tol) {
        MatrixClass::ZeroSumContraction
    } else {
        MatrixClass::General
    };
    ContractionMatrix { matrix: m, class, tol }
}

/// Classifies raw rows; non-square or non-finite input is a format error.
pub fn classify_rows(rows: Vec<Vec<f64>>, tol: f64) -> Result<ContractionMatrix> {
    Ok(classify(Matrix::from_rows(rows)?, tol))
}

/// One `θ · P` term.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub theta: f64,
    pub perm: Permutation,
}

/// `Σ θ_i P_i` together with the max-norm distance to its source matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedPermutationCombination {
    pub n: usize,
    pub terms: Vec<Term>,
    pub residual_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub theta: f64,
    /// 1-based images.
    pub perm: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub terms: Vec<TermJson>,
    pub residual_max: f64,
}

impl SignedPermutationCombination {
    pub fn reconstruct(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n);
        for t in &self.terms {
            for (i, &j) in t.perm.image().iter().enumerate() {
                m.set(i, j, m.get(i, j) + t.theta);
            }
        }
        m
    }

    /// `Σ θ_i (P_i x)`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for t in &self.terms {
            for (o, &j) in out.iter_mut().zip(t.perm.image()) {
                *o += t.theta * x[j];
            }
        }
        out
    }

    pub fn theta_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.theta).sum()
    }

    pub fn theta_abs_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.theta.abs()).sum()
    }

    pub fn to_json(&self) -> DecompositionJson {
        DecompositionJson {
            terms: self
                .terms
                .iter()
                .map(|t| TermJson {
                    theta: t.theta,
                    perm: t.perm.to_one_based(),
                })
                .collect(),
            residual_max: self.residual_max,
        }
    }

    pub fn from_json(json: &DecompositionJson) -> Result<Self> {
        let terms = json
            .terms
            .iter()
            .map(|t| {
                Ok(Term {
                    theta: t.theta,
                    perm: Permutation::from_one_based(&t.perm)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let n = terms.first().map_or(0, |t| t.perm.n());
        if terms.iter().any(|t| t.perm.n() != n) {
            return Err(Error::format("permutations of different sizes"));
        }
        Ok(Self {
            n,
            terms,
            residual_max: json.residual_max,
        })
    }
}

/// Perfect matching of rows to columns using only `allowed` cells, by
/// repeated augmenting-path search. Returns `row -> column`.
pub fn perfect_matching(n: usize, allowed: impl Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    fn augment(
        row: usize,
        n: usize,
        allowed: &dyn Fn(usize, usize) -> bool,
        seen: &mut [bool],
        col_owner: &mut [Option<usize>],
    ) -> bool {
        for col in 0..n {
            if !allowed(row, col) || seen[col] {
                continue;
            }
            seen[col] = true;
            let free = match col_owner[col] {
                None => true,
                Some(other) => augment(other, n, allowed, seen, col_owner),
            };
            if free {
                col_owner[col] = Some(row);
                return true;
            }
        }
        false
    }

    let mut col_owner = vec![None; n];
    let mut seen = vec![false; n];
    for row in 0..n {
        seen.iter_mut().for_each(|s| *s = false);
        if !augment(row, n, &allowed, &mut seen, &mut col_owner) {
            return None;
        }
    }
    let mut row_to_col = vec![0; n];
    for (col, owner) in col_owner.into_iter().enumerate() {
        row_to_col[owner.expect("perfect matching covers every column")] = col;
    }
    Some(row_to_col)
}

/// Permutation maximising its smallest entry among strictly positive cells,
/// together with that entry.
fn bottleneck_permutation(m: &Matrix) -> Option<(Permutation, f64)> {
    let n = m.n();
    let mut levels: Vec<f64> = m.as_slice().iter().copied().filter(|&v| v > 0.0).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let feasible = |level: f64| perfect_matching(n, |i, j| m.get(i, j) >= level);
    let mut best = feasible(*levels.first()?)?;
    let (mut lo, mut hi) = (0, levels.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        match feasible(levels[mid]) {
            Some(matching) => {
                best = matching;
                lo = mid;
            }
            None => hi = mid - 1,
        }
    }
    let theta = best
        .iter()
        .enumerate()
        .map(|(i, &j)| m.get(i, j))
        .fold(f64::INFINITY, f64::min);
    Some((Permutation::new(best).expect("matching is a bijection"), theta))
}

/// Convex combination of permutation matrices equal to a doubly stochastic
/// matrix. At most `n² − 2n + 2` terms are produced.
pub fn birkhoff_decompose(m: &Matrix, tol: f64) -> Result<SignedPermutationCombination> {
    if !is_doubly_stochastic(m, tol) {
        return Err(Error::domain("matrix is not doubly stochastic within tolerance"));
    }
    let n = m.n();
    let zero = n as f64 * RESIDUAL_ZERO;
    let mut residual = m.map(|v| v.max(0.0));
    let mut terms = Vec::new();
    while residual.max_abs() > zero {
        let Some((perm, theta)) = bottleneck_permutation(&residual).filter(|&(_, t)| t > DUST) else {
            if residual.max_abs() <= n as f64 * tol {
                break;
            }
            return Err(Error::Decomposition(format!(
                "residual with max entry {:e} has no positive perfect matching",
                residual.max_abs()
            )));
        };
        for (i, &j) in perm.image().iter().enumerate() {
            let v = residual.get(i, j) - theta;
            residual.set(i, j, if v <= DUST { 0.0 } else { v });
        }
        terms.push(Term { theta, perm });
        if terms.len() > n * n {
            return Err(Error::Decomposition("term count exceeded n²".into()));
        }
    }
    let mut out = SignedPermutationCombination {
        n,
        terms,
        residual_max: 0.0,
    };
    out.residual_max = out.reconstruct().max_abs_diff(m);
    Ok(out)
}

/// `[[M, A], [B, C]]` with `A_ij = (1 − R(i))/n`, `B_ij = (1 − C(j))/n` and
/// `C = (S/n) I`, where `R`, `C`, `S` are the row sums, column sums and total
/// of `M`.
#[allow(clippy::needless_range_loop)]
pub fn embed_double(m: &Matrix, tol: f64) -> Result<ContractionMatrix> {
    if !is_sub_doubly_stochastic(m, tol) {
        return Err(Error::domain("matrix is not sub-doubly stochastic within tolerance"));
    }
    let n = m.n();
    let nf = n as f64;
    let rows = m.row_sums();
    let cols = m.col_sums();
    let total: f64 = rows.iter().sum();
    let mut out = Matrix::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, m.get(i, j));
            out.set(i, n + j, (1.0 - rows[i]) / nf);
            out.set(n + i, j, (1.0 - cols[j]) / nf);
        }
        out.set(n + i, n + i, total / nf);
    }
    Ok(classify(out, tol))
}

/// Sub-doubly stochastic `N` with `M + N` doubly stochastic.
///
/// Each Birkhoff term of the embedding restricts to a sub-permutation of the
/// upper-left block; its uncovered rows are matched to uncovered columns
/// first-fit in index order, and `N` collects those completions.
pub fn complete_to_double(m: &Matrix, tol: f64) -> Result<ContractionMatrix> {
    let n = m.n();
    let embedded = embed_double(m, tol)?;
    let decomposition = birkhoff_decompose(embedded.matrix(), tol)?;
    let mut completion = Matrix::zeros(n);
    for term in &decomposition.terms {
        let image = term.perm.image();
        let mut col_used = vec![false; n];
        for &j in &image[..n] {
            if j < n {
                col_used[j] = true;
            }
        }
        let mut free_cols = (0..n).filter(|&j| !col_used[j]);
        for (row, &j) in image[..n].iter().enumerate() {
            if j >= n {
                let col = free_cols.next().expect("uncovered rows and columns balance");
                completion.set(row, col, completion.get(row, col) + term.theta);
            }
        }
    }
    Ok(classify(completion, tol))
}

/// `M = Σ θ_i P_i` with `Σ θ_i = 0` and `Σ |θ_i| = 1` for a zero-sum
/// contraction `M`.
///
/// With `A = (|M| + M)/2`, `B = (|M| − M)/2` and `C` completing `2A`, both
/// `2(A + C)` and `2(B + C)` are doubly stochastic; their Birkhoff terms enter
/// with weights `+λ_i/2` and `−λ'_i/2`. Terms with the same sign and
/// permutation are merged; opposite-sign terms are kept apart so that
/// `Σ |θ_i| = 1` survives (for `M = 0` the output is a canceling pair).
pub fn signed_decompose(m: &Matrix, tol: f64) -> Result<SignedPermutationCombination> {
    if !is_zero_sum_contraction(m, tol) {
        return Err(Error::domain(
            "matrix is not a zero-sum contraction (zero row/column sums, |M| sub-doubly stochastic)",
        ));
    }
    let n = m.n();
    let abs = m.abs();
    let twice_a = abs.add(m);
    let twice_b = abs.sub(m);
    let completion = complete_to_double(&twice_a, tol)?.into_matrix();
    // The completion inherits the residual Birkhoff leaves behind on the
    // 2n embedding: up to 2n entries of 2n·RESIDUAL_ZERO per row.
    let inner_tol = 3.0 * tol + (4 * n * n) as f64 * RESIDUAL_ZERO;
    let plus = birkhoff_decompose(&twice_a.add(&completion), inner_tol)?;
    let minus = birkhoff_decompose(&twice_b.add(&completion), inner_tol)?;

    let mut halves = [merge_terms(plus.terms), merge_terms(minus.terms)];
    for half in &mut halves {
        half.retain(|t| t.theta.abs() >= DROP_THETA);
        let s: f64 = half.iter().map(|t| t.theta).sum();
        if (s - 1.0).abs() < 1e-9 && s > 0.0 {
            half.iter_mut().for_each(|t| t.theta /= s);
        }
    }
    let [plus, minus] = halves;
    let terms = plus
        .into_iter()
        .map(|t| Term {
            theta: 0.5 * t.theta,
            perm: t.perm,
        })
        .chain(minus.into_iter().map(|t| Term {
            theta: -0.5 * t.theta,
            perm: t.perm,
        }))
        .collect();
    let mut out = SignedPermutationCombination {
        n,
        terms,
        residual_max: 0.0,
    };
    out.residual_max = out.reconstruct().max_abs_diff(m);
    Ok(out)
}

fn merge_terms(terms: Vec<Term>) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::with_capacity(terms.len());
    for t in terms {
        match out.iter_mut().find(|o| o.perm == t.perm) {
            Some(o) => o.theta += t.theta,
            None => out.push(t),
        }
    }
    out
}

/// Subtracts `R(i)/n` from row `i`; the result has zero row sums and acts on
/// zero-sum vectors exactly as `t` does.
pub fn center_rows(t: &Matrix) -> Matrix {
    let n = t.n();
    let rows = t.row_sums();
    let mut out = t.clone();
    for (i, r) in rows.iter().enumerate() {
        for j in 0..n {
            out.set(i, j, t.get(i, j) - r / n as f64);
        }
    }
    out
}

/// Subtracts `C(j)/n` from column `j`; the result has zero column sums and
/// agrees with `t` on vectors `d` with `Σ_j C(j) d_j = 0`.
pub fn center_cols(t: &Matrix) -> Matrix {
    let n = t.n();
    let cols = t.col_sums();
    let mut out = t.clone();
    for i in 0..n {
        for (j, c) in cols.iter().enumerate() {
            out.set(i, j, t.get(i, j) - c / n as f64);
        }
    }
    out
}
