//! Step functions on `[0, 1]` and the rearrangement calculus.
//!
//! A [`StepFunction`] with `n` cells takes the value `values[i]` on
//! `[i/n, (i+1)/n)`. All integrals are with respect to Lebesgue measure, so
//! every cell carries weight `1/n`.
//!
//! The decreasing rearrangement `f#` of `|f|` is again a step function on the
//! same grid, and `K(t, f) = ∫_0^t f#` is piecewise linear in `t` with
//! breakpoints at `j/n`. Checking weak majorization at those breakpoints
//! therefore certifies it for every `t ∈ [0, 1]`.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepFunction {
    n: usize,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct StepFunctionRepr {
    n: usize,
    values: Vec<f64>,
}

impl<'de> Deserialize<'de> for StepFunction {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = StepFunctionRepr::deserialize(de)?;
        if repr.n != repr.values.len() {
            return Err(serde::de::Error::custom(format!(
                "n = {} but {} values given",
                repr.n,
                repr.values.len()
            )));
        }
        StepFunction::new(repr.values).map_err(serde::de::Error::custom)
    }
}

impl StepFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::format("step function needs at least one cell"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::format(format!("cell {i} is not finite")));
        }
        Ok(Self {
            n: values.len(),
            values,
        })
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.n as f64
    }

    /// `‖f‖_p` for `p ≥ 1`, with `p = ∞` the largest absolute cell.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        check_exponent(p)?;
        Ok(lp_norm_unchecked(&self.values, p))
    }

    /// Replicates every cell `factor` times, giving the same function on a
    /// grid of `n * factor` cells.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::domain("refinement factor must be positive"));
        }
        let values = self
            .values
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, factor))
            .collect();
        Ok(Self {
            n: self.n * factor,
            values,
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            n: self.n,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::domain(format!("exponent p = {p} must satisfy p ≥ 1")));
    }
    Ok(())
}

/// Normalised `L_p` norm of equally weighted cells; `p` already validated.
pub(crate) fn lp_norm_unchecked(values: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let n = values.len() as f64;
    if p == 1.0 {
        return values.iter().map(|v| v.abs()).sum::<f64>() / n;
    }
    if p == 2.0 {
        return (values.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    }
    (values.iter().map(|v| v.abs().powf(p)).sum::<f64>() / n).powf(1.0 / p)
}

/// Resamples both functions to the least common multiple of their grids.
pub fn common_refinement(f: &StepFunction, g: &StepFunction) -> (StepFunction, StepFunction) {
    if f.n == g.n {
        return (f.clone(), g.clone());
    }
    let l = f.n.lcm(&g.n);
    (
        f.refine(l / f.n).expect("positive factor"),
        g.refine(l / g.n).expect("positive factor"),
    )
}

/// Absolute values sorted non-increasingly; ties keep their original order.
pub fn sorted_abs(values: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Order `σ` with `f#_k = |f_{σ(k)}|`, stable in the original index.
pub fn rearrangement_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()));
    idx
}

pub fn decreasing_rearrangement(f: &StepFunction) -> StepFunction {
    StepFunction {
        n: f.n,
        values: sorted_abs(&f.values),
    }
}

/// `K_j = ∫_0^{j/n} f#` for `j = 0..=n`.
pub fn k_functional_breakpoints(f: &StepFunction) -> Vec<f64> {
    partial_integrals(&sorted_abs(&f.values))
}

fn partial_integrals(sorted: &[f64]) -> Vec<f64> {
    let n = sorted.len() as f64;
    let mut out = Vec::with_capacity(sorted.len() + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for v in sorted {
        acc += v;
        out.push(acc / n);
    }
    out
}

/// `∫_0^t f#(s) ds`, exact for step functions.
pub fn k_functional(f: &StepFunction, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("t = {t} outside [0, 1]")));
    }
    let sorted = sorted_abs(&f.values);
    let n = f.n as f64;
    let pos = t * n;
    let full = (pos.floor() as usize).min(f.n);
    let head: f64 = sorted[..full].iter().sum();
    let frac = if full < f.n { (pos - full as f64) * sorted[full] } else { 0.0 };
    Ok((head + frac) / n)
}

/// Largest `K_g(j/n) − K_f(j/n)` over the breakpoints of the common grid.
///
/// Never negative, since both sides vanish at `t = 0`.
pub fn majorization_margin(f: &StepFunction, g: &StepFunction) -> f64 {
    let (f, g) = common_refinement(f, g);
    let kf = k_functional_breakpoints(&f);
    let kg = k_functional_breakpoints(&g);
    kf.iter()
        .zip(&kg)
        .map(|(a, b)| b - a)
        .fold(0.0, f64::max)
}

/// True iff `∫_0^t g# ≤ ∫_0^t f# + tol` for every `t ∈ [0, 1]`.
pub fn weakly_majorizes(f: &StepFunction, g: &StepFunction, tol: f64) -> bool {
    majorization_margin(f, g) <= tol
}

/// `E[λ ∨ |f|] = (1/n) Σ max(λ, |v_i|)`.
pub fn lambda_max_expectation(f: &StepFunction, lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::domain(format!("λ = {lambda} must be nonnegative")));
    }
    Ok(lambda_max_unchecked(&f.values, lambda))
}

fn lambda_max_unchecked(values: &[f64], lambda: f64) -> f64 {
    values.iter().map(|v| v.abs().max(lambda)).sum::<f64>() / values.len() as f64
}

/// Both sides of the `λ ∨` / rearrangement-integral equivalence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    /// `E[λ ∨ |g|] ≤ E[λ ∨ |f|] + tol` on every test level.
    pub lambda_condition: bool,
    /// `∫_0^t g# ≤ ∫_0^t f# + tol` on every breakpoint.
    pub majorization: bool,
    /// Worst `E[λ ∨ |g|] − E[λ ∨ |f|]`.
    pub lambda_margin: f64,
    /// Worst `∫_0^t g# − ∫_0^t f#`.
    pub majorization_margin: f64,
}

impl EquivalenceReport {
    pub fn agree(&self) -> bool {
        self.lambda_condition == self.majorization
    }

    pub fn margin(&self) -> f64 {
        self.lambda_margin.max(self.majorization_margin)
    }
}

/// Worst `E[λ ∨ |g|] − E[λ ∨ |f|]` over `{0} ∪ |f| ∪ |g|`.
///
/// `λ ↦ E[λ ∨ |h|]` is convex piecewise linear with kinks at the cell values,
/// so the difference is maximised at one of these levels.
pub fn lambda_margin(f: &StepFunction, g: &StepFunction) -> f64 {
    std::iter::once(0.0)
        .chain(f.values.iter().map(|v| v.abs()))
        .chain(g.values.iter().map(|v| v.abs()))
        .map(|l| lambda_max_unchecked(&g.values, l) - lambda_max_unchecked(&f.values, l))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn check_lambda_equivalence(f: &StepFunction, g: &StepFunction, tol: f64) -> EquivalenceReport {
    let lm = lambda_margin(f, g);
    let mm = majorization_margin(f, g);
    EquivalenceReport {
        lambda_condition: lm <= tol,
        majorization: mm <= tol,
        lambda_margin: lm,
        majorization_margin: mm,
    }
}

/// `‖f − g‖_p − ‖f# − g#‖_p`, nonnegative up to rounding.
pub fn czr_contraction_gap(f: &StepFunction, g: &StepFunction, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let (f, g) = common_refinement(f, g);
    let diff: Vec<f64> = f.values.iter().zip(&g.values).map(|(a, b)| a - b).collect();
    let fs = sorted_abs(&f.values);
    let gs = sorted_abs(&g.values);
    let sdiff: Vec<f64> = fs.iter().zip(&gs).map(|(a, b)| a - b).collect();
    Ok(lp_norm_unchecked(&diff, p) - lp_norm_unchecked(&sdiff, p))
}
