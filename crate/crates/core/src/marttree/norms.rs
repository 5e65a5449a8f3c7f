//! `L_p` norms of partial sums `Σ_{j≤k} d_j`.
//!
//! Exact mode enumerates all `N^k` equally likely paths. Monte Carlo mode
//! samples paths uniformly and reports a bootstrap standard error. Both split
//! work into fixed chunks with their own random streams, so the output is the
//! same for any worker count.

use rand::Rng as _;
use serde::Serialize;

use super::tree::MartingaleTree;
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::rearrange::check_exponent;
use crate::rng::{self, tag};

pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;
const EXACT_CHUNK: usize = 1 << 14;
const MC_CHUNK: usize = 1 << 12;
pub const BOOTSTRAP_REPLICATES: usize = 200;

#[derive(Debug, Clone, Copy)]
pub struct NormOptions {
    pub cap: u64,
    pub exec: Execution,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_ENUMERATION_CAP,
            exec: Execution::default(),
        }
    }
}

fn check_upto(t: &MartingaleTree, upto: usize) -> Result<()> {
    if upto > t.depth() {
        return Err(Error::domain(format!("upto = {upto} exceeds depth {}", t.depth())));
    }
    Ok(())
}

/// Partial sum along the path with base-`N` index `path` of length `upto`.
#[inline]
fn path_sum(t: &MartingaleTree, upto: usize, divisors: &[usize], path: usize) -> f64 {
    (1..=upto)
        .map(|k| t.increments(k)[path / divisors[k - 1]])
        .sum()
}

/// `divisors[k-1] = N^(upto-k)`, mapping a full path index to its length-`k`
/// prefix.
fn prefix_divisors(branching: usize, upto: usize) -> Vec<usize> {
    (1..=upto)
        .map(|k| branching.pow((upto - k) as u32))
        .collect()
}

/// Accumulator for `Σ |S|^p`, or `max |S|` when `p = ∞`.
#[derive(Clone, Copy)]
struct Moment {
    p: f64,
}

impl Moment {
    #[inline]
    fn weight(&self, s: f64) -> f64 {
        let a = s.abs();
        if self.p.is_infinite() {
            a
        } else if self.p == 2.0 {
            a * a
        } else if self.p == 1.0 {
            a
        } else {
            a.powf(self.p)
        }
    }

    #[inline]
    fn combine(&self, acc: f64, w: f64) -> f64 {
        if self.p.is_infinite() {
            acc.max(w)
        } else {
            acc + w
        }
    }

    fn finish(&self, total: f64, count: usize) -> f64 {
        if self.p.is_infinite() {
            total
        } else {
            (total / count as f64).powf(1.0 / self.p)
        }
    }
}

/// `‖Σ_{j≤upto} d_j‖_p` by full enumeration.
pub fn lp_norm_partial_sum(t: &MartingaleTree, p: f64, upto: usize) -> Result<f64> {
    lp_norm_partial_sum_with(t, p, upto, &NormOptions::default())
}

pub fn lp_norm_partial_sum_with(
    t: &MartingaleTree,
    p: f64,
    upto: usize,
    opts: &NormOptions,
) -> Result<f64> {
    check_exponent(p)?;
    check_upto(t, upto)?;
    if upto == 0 {
        return Ok(0.0);
    }
    let paths = (t.branching() as u128).checked_pow(upto as u32).unwrap_or(u128::MAX);
    if paths > opts.cap as u128 {
        return Err(Error::EnumerationCap { paths, cap: opts.cap });
    }
    let paths = paths as usize;
    let divisors = prefix_divisors(t.branching(), upto);
    let m = Moment { p };
    let partials = par::map_chunks(opts.exec, paths, EXACT_CHUNK, |_, range| {
        range.fold(0.0, |acc, i| m.combine(acc, m.weight(path_sum(t, upto, &divisors, i))))
    });
    let total = partials.into_iter().fold(0.0, |acc, w| m.combine(acc, w));
    Ok(m.finish(total, paths))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub samples: usize,
}

/// Plug-in estimate of `‖Σ_{j≤depth} d_j‖_p` from `samples` uniform paths,
/// with a bootstrap standard error over [`BOOTSTRAP_REPLICATES`] resamples.
pub fn monte_carlo_lp(t: &MartingaleTree, p: f64, samples: usize, seed: u64) -> Result<MonteCarloEstimate> {
    monte_carlo_lp_with(t, p, t.depth(), samples, seed, Execution::default())
}

pub fn monte_carlo_lp_with(
    t: &MartingaleTree,
    p: f64,
    upto: usize,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<MonteCarloEstimate> {
    check_exponent(p)?;
    check_upto(t, upto)?;
    if samples < 100 {
        return Err(Error::domain(format!("samples = {samples}; at least 100 required")));
    }
    let n = t.branching();
    let divisors = prefix_divisors(n, upto);
    let m = Moment { p };
    let weights: Vec<f64> = par::map_chunks(exec, samples, MC_CHUNK, |c, range| {
        let mut rng = rng::stream(seed, tag::MC_CHUNK, &[c]);
        range
            .map(|_| {
                let path = (0..upto).fold(0usize, |acc, _| acc * n + rng.gen_range(0..n));
                m.weight(path_sum(t, upto, &divisors, path))
            })
            .collect::<Vec<f64>>()
    })
    .into_iter()
    .flatten()
    .collect();

    let statistic = |ws: &mut dyn Iterator<Item = f64>| {
        let total = ws.fold(0.0, |acc, w| m.combine(acc, w));
        m.finish(total, samples)
    };
    let estimate = statistic(&mut weights.iter().copied());

    let replicates = par::map_indices(exec, 0..BOOTSTRAP_REPLICATES, |b| {
        let mut rng = rng::stream(seed, tag::BOOTSTRAP, &[b]);
        statistic(&mut (0..samples).map(|_| weights[rng.gen_range(0..samples)]))
    });
    let mean = replicates.iter().sum::<f64>() / replicates.len() as f64;
    let var = replicates.iter().map(|r| (r - mean).powi(2)).sum::<f64>()
        / (replicates.len() - 1) as f64;
    Ok(MonteCarloEstimate {
        estimate,
        standard_error: var.sqrt(),
        samples,
    })
}
