//! Projection of step functions with rational breakpoints onto a uniform grid
//! `{j/N}` and the approximation of a dominated pair by grid functions.

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rearrange::{
    check_exponent, decreasing_rearrangement, lp_norm_unchecked, rearrangement_order,
    weakly_majorizes, StepFunction,
};

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub from: Rational,
    pub to: Rational,
    pub value: f64,
}

/// A step function on `[0, 1)` whose pieces `[from, to)` have rational ends.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFunction {
    pieces: Vec<Piece>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PieceJson {
    pub from: [i64; 2],
    pub to: [i64; 2],
    pub value: f64,
}

/// `{"pieces": [{"from": [num, den], "to": [num, den], "value": v}, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PiecewiseJson {
    pub pieces: Vec<PieceJson>,
}

fn rational([num, den]: [i64; 2]) -> Result<Rational> {
    if den <= 0 {
        return Err(Error::format(format!("denominator {den} must be positive")));
    }
    Ok(Rational::new(num, den))
}

impl PiecewiseFunction {
    /// Pieces must be contiguous, non-empty, and cover `[0, 1)` exactly.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::format("no pieces"));
        }
        let mut at = Rational::from_integer(0);
        for (i, p) in pieces.iter().enumerate() {
            if p.from != at {
                return Err(Error::format(format!(
                    "piece {i} starts at {} but the previous one ends at {at}",
                    p.from
                )));
            }
            if p.to <= p.from {
                return Err(Error::format(format!("piece {i} is empty or reversed")));
            }
            if !p.value.is_finite() {
                return Err(Error::format(format!("piece {i} has a non-finite value")));
            }
            at = p.to;
        }
        if at != Rational::from_integer(1) {
            return Err(Error::format(format!("pieces end at {at}, not at 1")));
        }
        Ok(Self { pieces })
    }

    pub fn from_json(json: &PiecewiseJson) -> Result<Self> {
        let pieces = json
            .pieces
            .iter()
            .map(|p| {
                Ok(Piece {
                    from: rational(p.from)?,
                    to: rational(p.to)?,
                    value: p.value,
                })
            })
            .collect::<Result<_>>()?;
        Self::new(pieces)
    }

    pub fn to_json(&self) -> PiecewiseJson {
        let pair = |r: &Rational| [*r.numer(), *r.denom()];
        PiecewiseJson {
            pieces: self
                .pieces
                .iter()
                .map(|p| PieceJson {
                    from: pair(&p.from),
                    to: pair(&p.to),
                    value: p.value,
                })
                .collect(),
        }
    }

    /// The grid function `f` viewed as pieces `[j/N, (j+1)/N)`.
    pub fn from_step(f: &StepFunction) -> Self {
        let n = f.n() as i64;
        Self {
            pieces: f
                .values()
                .iter()
                .enumerate()
                .map(|(j, &value)| Piece {
                    from: Rational::new(j as i64, n),
                    to: Rational::new(j as i64 + 1, n),
                    value,
                })
                .collect(),
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Interior breakpoints together with `0` and `1`.
    pub fn breakpoints(&self) -> Vec<Rational> {
        std::iter::once(self.pieces[0].from)
            .chain(self.pieces.iter().map(|p| p.to))
            .collect()
    }

    pub fn integral(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.value * ratio_to_f64(p.to - p.from))
            .sum()
    }
}

fn ratio_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Least common denominator of `breakpoints`.
pub fn common_grid(breakpoints: &[Rational]) -> Result<usize> {
    let mut n: i64 = 1;
    for b in breakpoints {
        let den = *b.denom();
        let g = n.gcd(&den);
        n = (n / g)
            .checked_mul(den)
            .ok_or_else(|| Error::format("common denominator overflows 64 bits"))?;
    }
    usize::try_from(n).map_err(|_| Error::format("common denominator does not fit in usize"))
}

/// Cell averages of `f` on the grid `{j/N}`; `N` must put every breakpoint
/// of `f` on the grid, which makes each cell average a single piece value.
pub fn project(f: &PiecewiseFunction, n: usize) -> Result<StepFunction> {
    if n == 0 {
        return Err(Error::domain("grid size must be positive"));
    }
    let grid = common_grid(&f.breakpoints())?;
    if !n.is_multiple_of(grid) {
        return Err(Error::domain(format!(
            "grid N = {n} is not a multiple of the breakpoint grid {grid}"
        )));
    }
    let mut values = Vec::with_capacity(n);
    let n_i = n as i64;
    for p in &f.pieces {
        let cells = (p.to - p.from) * Rational::from_integer(n_i);
        debug_assert!(cells.is_integer());
        values.extend(std::iter::repeat_n(p.value, cells.to_integer() as usize));
    }
    StepFunction::new(values)
}

#[derive(Debug, Clone, Serialize)]
pub struct ApproximatePair {
    pub d: StepFunction,
    pub e: StepFunction,
    pub n: usize,
    pub gamma: f64,
    pub d_error: f64,
    pub e_error: f64,
}

/// `γ = ½ · min{ε / (7 max(‖d‖_p, ‖e‖_p)), 1/3}`, strictly inside the
/// admissible range.
pub fn choose_gamma(eps: f64, norm: f64) -> f64 {
    let cap = if norm > 0.0 { eps / (7.0 * norm) } else { f64::INFINITY };
    0.5 * cap.min(1.0 / 3.0)
}

/// Rearranges, projects onto the grid, undoes the rearrangement and removes
/// the mean. On an already aligned grid the projection of `f#` is `f#`
/// itself, so this returns `f` up to its mean.
fn grid_rebuild(f: &StepFunction) -> Vec<f64> {
    let values = f.values();
    let order = rearrangement_order(values);
    let sharp = decreasing_rearrangement(f);
    let mut hat = vec![0.0; values.len()];
    for (rank, &i) in order.iter().enumerate() {
        hat[i] = values[i].signum() * sharp.values()[rank];
    }
    let mean = hat.iter().sum::<f64>() / hat.len() as f64;
    hat.iter_mut().for_each(|v| *v -= mean);
    hat
}

/// Scales `values` and forces their left-to-right sum to be exactly zero by
/// resetting the last cell.
fn scale_zero_mean(values: Vec<f64>, c: f64) -> Result<StepFunction> {
    let mut out: Vec<f64> = values.into_iter().map(|v| c * v).collect();
    if let Some((last, rest)) = out.split_last_mut() {
        *last = -rest.iter().sum::<f64>();
    }
    StepFunction::new(out)
}

pub fn approximate_pair(
    d: &PiecewiseFunction,
    e: &PiecewiseFunction,
    eps: f64,
    p: f64,
) -> Result<ApproximatePair> {
    approximate_pair_with_tol(d, e, eps, p, crate::DEFAULT_TOL)
}

pub fn approximate_pair_with_tol(
    d: &PiecewiseFunction,
    e: &PiecewiseFunction,
    eps: f64,
    p: f64,
    tol: f64,
) -> Result<ApproximatePair> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain(format!("ε = {eps} must be positive")));
    }
    check_exponent(p)?;
    for (name, f) in [("d", d), ("e", e)] {
        let m = f.integral();
        if m.abs() > tol {
            return Err(Error::domain(format!("mean of {name} is {m}, not zero")));
        }
    }
    let n = common_grid(&[d.breakpoints(), e.breakpoints()].concat())?;
    let dn = project(d, n)?;
    let en = project(e, n)?;
    if !weakly_majorizes(&dn, &en, tol) {
        return Err(Error::domain("the rearrangement integrals of e exceed those of d"));
    }
    let norm = lp_norm_unchecked(dn.values(), p).max(lp_norm_unchecked(en.values(), p));
    let gamma = choose_gamma(eps, norm);
    let d_prime = scale_zero_mean(grid_rebuild(&dn), 1.0 + 3.0 * gamma)?;
    let e_prime = scale_zero_mean(grid_rebuild(&en), 1.0 - 3.0 * gamma)?;
    let diff = |a: &StepFunction, b: &StepFunction| {
        let v: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
        lp_norm_unchecked(&v, p)
    };
    Ok(ApproximatePair {
        d_error: diff(&dn, &d_prime),
        e_error: diff(&en, &e_prime),
        d: d_prime,
        e: e_prime,
        n,
        gamma,
    })
}
