//! Ratio sweeps `‖Σ e_k‖_p / ‖Σ d_k‖_p` over generated pairs.

use serde::Serialize;

use super::generate::{dominated_pair, PairKind, PairParams};
use super::norms::{
    lp_norm_partial_sum_with, monte_carlo_lp_with, NormOptions, DEFAULT_ENUMERATION_CAP,
};
use super::tree::MartingaleTree;
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::rearrange::check_exponent;
use crate::rng;

pub const OUTSIDE_RANGE: &str = "outside theorem range";

#[derive(Debug, Clone)]
pub struct RatioConfig {
    pub generator: PairKind,
    pub ps: Vec<f64>,
    pub depth: usize,
    pub branching: usize,
    pub kappa: f64,
    /// Monte Carlo sample count; 0 selects exact enumeration.
    pub samples: usize,
    pub pairs: usize,
    pub seed: u64,
    pub tol: f64,
    pub exec: Execution,
}

impl RatioConfig {
    pub fn new(generator: PairKind, depth: usize, branching: usize) -> Self {
        Self {
            generator,
            ps: vec![2.0],
            depth,
            branching,
            kappa: 1.0,
            samples: 0,
            pairs: 1,
            seed: 0,
            tol: crate::DEFAULT_TOL,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormValue {
    pub value: f64,
    /// Bootstrap standard error; absent for exact values.
    pub standard_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioRow {
    pub generator: PairKind,
    #[serde(serialize_with = "serialize_p")]
    pub p: f64,
    pub depth: usize,
    pub branching: usize,
    pub ratio: f64,
    pub hypothesis_ok: bool,
    /// Seed of this pair.
    pub seed: u64,
    pub norm_d: NormValue,
    pub norm_e: NormValue,
    pub exact: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairOutcome {
    pub seed: u64,
    pub hypothesis_ok: bool,
    /// Paths of nodes where the hypothesis check failed.
    pub failed_nodes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MaxRatio {
    #[serde(serialize_with = "serialize_p")]
    pub p: f64,
    pub max_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub generator: PairKind,
    pub seed: u64,
    pub exact: bool,
    pub samples: usize,
    #[serde(serialize_with = "serialize_ps")]
    pub ps: Vec<f64>,
    pub pairs: Vec<PairOutcome>,
    pub rows: Vec<RatioRow>,
    pub max_ratios: Vec<MaxRatio>,
}

impl ExperimentReport {
    pub fn hypothesis_ok(&self) -> bool {
        self.pairs.iter().all(|p| p.hypothesis_ok)
    }

    pub fn max_ratio(&self, p: f64) -> Option<f64> {
        self.max_ratios.iter().find(|m| m.p == p).map(|m| m.max_ratio)
    }
}

/// `"inf"` for `p = ∞`, the number otherwise.
pub fn format_p(p: f64) -> String {
    if p.is_infinite() {
        "inf".to_string()
    } else {
        p.to_string()
    }
}

fn serialize_p<S: serde::Serializer>(p: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if p.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*p)
    }
}

fn serialize_ps<S: serde::Serializer>(ps: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(ps.len()))?;
    for p in ps {
        if p.is_infinite() {
            seq.serialize_element("inf")?;
        } else {
            seq.serialize_element(p)?;
        }
    }
    seq.end()
}

/// `‖e‖ / ‖d‖`, with `0/0 = 0`.
pub fn ratio(norm_e: f64, norm_d: f64) -> f64 {
    if norm_d == 0.0 {
        if norm_e == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        norm_e / norm_d
    }
}

/// Exact or Monte Carlo norm of the full partial sum.
pub fn full_norm(t: &MartingaleTree, p: f64, samples: usize, seed: u64, exec: Execution) -> Result<NormValue> {
    if samples == 0 {
        let opts = NormOptions {
            exec,
            ..NormOptions::default()
        };
        Ok(NormValue {
            value: lp_norm_partial_sum_with(t, p, t.depth(), &opts)?,
            standard_error: None,
        })
    } else {
        let est = monte_carlo_lp_with(t, p, t.depth(), samples, seed, exec)?;
        Ok(NormValue {
            value: est.estimate,
            standard_error: Some(est.standard_error),
        })
    }
}

pub fn run_ratio_experiment(cfg: &RatioConfig) -> Result<ExperimentReport> {
    for &p in &cfg.ps {
        check_exponent(p)?;
    }
    if cfg.samples == 0 {
        let paths = (cfg.branching as u128)
            .checked_pow(cfg.depth as u32)
            .unwrap_or(u128::MAX);
        if paths > DEFAULT_ENUMERATION_CAP as u128 {
            return Err(Error::EnumerationCap {
                paths,
                cap: DEFAULT_ENUMERATION_CAP,
            });
        }
    }
    let params = PairParams {
        depth: cfg.depth,
        branching: cfg.branching,
        kappa: cfg.kappa,
    };
    let per_pair = par::map_indices(cfg.exec, 0..cfg.pairs, |i| -> Result<_> {
        let seed = rng::derive_seed(cfg.seed, i);
        let pair = dominated_pair(cfg.generator, params, seed)?;
        let checks = pair.hypothesis(cfg.tol)?;
        let outcome = PairOutcome {
            seed,
            hypothesis_ok: checks.all(),
            failed_nodes: checks.failures(),
        };
        let mut rows = Vec::with_capacity(cfg.ps.len());
        for &p in &cfg.ps {
            // Common random paths for d and e.
            let norm_d = full_norm(&pair.d, p, cfg.samples, seed, Execution::Sequential)?;
            let norm_e = full_norm(&pair.e, p, cfg.samples, seed, Execution::Sequential)?;
            rows.push(RatioRow {
                generator: cfg.generator,
                p,
                depth: cfg.depth,
                branching: cfg.branching,
                ratio: ratio(norm_e.value, norm_d.value),
                hypothesis_ok: outcome.hypothesis_ok,
                seed,
                norm_d,
                norm_e,
                exact: cfg.samples == 0,
            });
        }
        Ok((outcome, rows))
    });

    let mut pairs = Vec::with_capacity(cfg.pairs);
    let mut rows = Vec::with_capacity(cfg.pairs * cfg.ps.len());
    for r in per_pair {
        let (outcome, r) = r?;
        pairs.push(outcome);
        rows.extend(r);
    }
    let max_ratios = cfg
        .ps
        .iter()
        .map(|&p| MaxRatio {
            p,
            max_ratio: rows
                .iter()
                .filter(|r| r.p == p)
                .fold(0.0, |m, r| m.max(r.ratio)),
            note: (p <= 1.0).then_some(OUTSIDE_RANGE),
        })
        .collect();
    Ok(ExperimentReport {
        generator: cfg.generator,
        seed: cfg.seed,
        exact: cfg.samples == 0,
        samples: cfg.samples,
        ps: cfg.ps.clone(),
        pairs,
        rows,
        max_ratios,
    })
}
