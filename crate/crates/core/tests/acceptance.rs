//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Every check is made against values recomputed here.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;
use strongdom::gridapprox::{approximate_pair, Piece, PiecewiseFunction};
use strongdom::marttree::{
    check_domination, check_kappa_domination, check_lambda_condition,
    check_strong_domination, check_subordination, dominated_pair, global_sign_pair,
    lp_norm_partial_sum, monte_carlo_lp, proof_pipeline, random_tree, NodeMap, PairKind,
    PairParams,
};
use strongdom::rearrange::{check_lambda_equivalence, czr_contraction_gap};
use strongdom::stochmat::{
    birkhoff_decompose, center_cols, center_rows, classify, complete_to_double, embed_double,
    signed_decompose, MatrixClass,
};
use strongdom::transfer::{construct_transfer, verify_only_if};
use strongdom::{Error, Matrix, StepFunction};

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// Collects failure descriptions; only the first few are kept.
#[derive(Default)]
struct Failures {
    count: usize,
    first: Vec<String>,
}

impl Failures {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.count += 1;
            if self.first.len() < 3 {
                self.first.push(what());
            }
        }
    }

    fn outcome(self, summary: String) -> Outcome {
        if self.count == 0 {
            Outcome::new(true, summary)
        } else {
            Outcome::new(false, format!("{summary}; {} failures, e.g. {}", self.count, self.first.join(" | ")))
        }
    }
}

fn sf(v: Vec<f64>) -> StepFunction {
    StepFunction::new(v).unwrap()
}

fn birkhoff() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(1);
    let mut fails = Failures::default();
    let (mut worst_err, mut worst_ratio) = (0.0f64, 0.0f64);
    for case in 0..200 {
        let n = 2 + case % 7;
        let m = random_doubly_stochastic(&mut rng, n, 20);
        match birkhoff_decompose(&m, 1e-9) {
            Ok(dec) => {
                let terms: Vec<(f64, Vec<usize>)> =
                    dec.terms.iter().map(|t| (t.theta, t.perm.image().to_vec())).collect();
                let valid = terms.iter().all(|(th, im)| *th > 0.0 && is_bijection(im));
                let err = max_abs_diff(combine(n, &terms).as_slice(), m.as_slice());
                let bound = n * n - 2 * n + 2;
                worst_err = worst_err.max(err);
                worst_ratio = worst_ratio.max(terms.len() as f64 / bound as f64);
                fails.check(valid && err <= 1e-9 && terms.len() <= bound, || {
                    format!("case {case}: n={n} err={err:e} terms={}", terms.len())
                });
            }
            Err(e) => fails.check(false, || format!("case {case}: {e}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    fails.check(secs < 10.0, || format!("runtime {secs:.2}s"));
    fails.outcome(format!(
        "200 matrices, max error {worst_err:.1e}, max terms/(n²-2n+2) {worst_ratio:.2}, {secs:.2}s"
    ))
}

fn signed() -> Outcome {
    let mut rng = rng(2);
    let mut fails = Failures::default();
    let mut worst = [0.0f64; 3];
    let mut built = 0;
    while built < 200 {
        let n = 2 + built % 7;
        let m = random_zero_sum_contraction(&mut rng, n);
        // Re-validate the construction independently.
        let zero_sums = row_sums(&m).iter().chain(&col_sums(&m)).all(|s| s.abs() <= 1e-12);
        let contraction = abs_row_sums(&m).iter().chain(&abs_col_sums(&m)).all(|&s| s <= 1.0 + 1e-12);
        if !(zero_sums && contraction) {
            continue;
        }
        built += 1;
        match signed_decompose(&m, 1e-12) {
            Ok(dec) => {
                let terms: Vec<(f64, Vec<usize>)> =
                    dec.terms.iter().map(|t| (t.theta, t.perm.image().to_vec())).collect();
                let sum: f64 = terms.iter().map(|t| t.0).sum();
                let abs: f64 = terms.iter().map(|t| t.0.abs()).sum();
                let err = max_abs_diff(combine(n, &terms).as_slice(), m.as_slice());
                worst[0] = worst[0].max(sum.abs());
                worst[1] = worst[1].max((abs - 1.0).abs());
                worst[2] = worst[2].max(err);
                fails.check(
                    sum.abs() <= 1e-12 && (abs - 1.0).abs() <= 1e-12 && err <= 1e-9,
                    || format!("n={n}: Σθ={sum:e} Σ|θ|-1={:e} err={err:e}", abs - 1.0),
                );
            }
            Err(e) => fails.check(false, || format!("n={n}: {e}")),
        }
    }
    fails.outcome(format!(
        "200 matrices, max |Σθ| {:.1e}, max |Σ|θ|-1| {:.1e}, max error {:.1e}",
        worst[0], worst[1], worst[2]
    ))
}

fn embedding() -> Outcome {
    let mut rng = rng(3);
    let mut fails = Failures::default();
    let mut worst = 0.0f64;
    for case in 0..200 {
        let n = 2 + case % 7;
        let m = random_sub_doubly_stochastic(&mut rng, n);
        match embed_double(&m, 1e-12) {
            Ok(e) => {
                let out = e.matrix();
                let ok = classify(out.clone(), 1e-12).class() == MatrixClass::DoublyStochastic
                    && out.as_slice().iter().all(|&v| v >= -1e-12)
                    && row_sums(out).iter().chain(&col_sums(out)).all(|s| (s - 1.0).abs() <= 1e-12);
                fails.check(ok, || format!("case {case}: embedding not doubly stochastic"));
            }
            Err(e) => fails.check(false, || format!("case {case}: embed {e}")),
        }
        match complete_to_double(&m, 1e-12) {
            Ok(c) => {
                let nm = c.matrix();
                let sub = nm.as_slice().iter().all(|&v| v >= -1e-9)
                    && row_sums(nm).iter().chain(&col_sums(nm)).all(|&s| s <= 1.0 + 1e-9);
                let total = m.add(nm);
                let dev = row_sums(&total)
                    .iter()
                    .chain(&col_sums(&total))
                    .fold(0.0f64, |a, s| a.max((s - 1.0).abs()));
                worst = worst.max(dev);
                fails.check(sub && dev <= 1e-9, || format!("case {case}: sub={sub} dev={dev:e}"));
            }
            Err(e) => fails.check(false, || format!("case {case}: complete {e}")),
        }
    }
    fails.outcome(format!("200 matrices, max |row/col sum of M+N − 1| {worst:.1e}"))
}

fn transfer_operator() -> Outcome {
    let mut rng = rng(4);
    let mut fails = Failures::default();
    let (mut worst_res, mut worst_norm) = (0.0f64, 0.0f64);
    let mut rejected = 0;
    for case in 0..200 {
        let n = 2 + case % 7;
        let f = random_vector(&mut rng, n, 2.0);
        let t = random_contraction(&mut rng, n);
        let g = mat_vec(&t, &f);
        let f_inf = lp(&f, f64::INFINITY);
        match construct_transfer(&f, &g, 1e-9) {
            Ok(cert) => {
                let res = max_abs_diff(&mat_vec(&cert.matrix, &f), &g);
                let norm = abs_row_sums(&cert.matrix)
                    .into_iter()
                    .chain(abs_col_sums(&cert.matrix))
                    .fold(0.0, f64::max);
                worst_res = worst_res.max(res / (1.0 + f_inf));
                worst_norm = worst_norm.max(norm);
                fails.check(res <= 1e-9 * (1.0 + f_inf) && norm <= 1.0 + 1e-12, || {
                    format!("case {case}: residual {res:e}, norm {norm}")
                });
            }
            Err(e) => fails.check(false, || format!("case {case}: {e}")),
        }

        // Scale g up until some partial sum of g# clearly exceeds that of f#.
        let worst_k = (1..=n)
            .map(|k| top_k_sum_by_subsets(&g, k) / top_k_sum_by_subsets(&f, k).max(1e-300))
            .fold(0.0, f64::max);
        let c = if worst_k > 0.0 { 1.05 / worst_k } else { 1.0 };
        let mut bad: Vec<f64> = g.iter().map(|v| v * c).collect();
        if bad.iter().all(|v| *v == 0.0) {
            bad[0] = 1.05 * f_inf.max(1.0);
        }
        let oracle_rejects = !majorized_by_subsets(&f, &bad, 1e-9);
        match construct_transfer(&f, &bad, 1e-9) {
            Err(e @ Error::NotMajorized { .. }) if e.is_rejection() && oracle_rejects => rejected += 1,
            other => fails.check(false, || {
                format!("case {case}: perturbed pair not rejected ({:?})", other.map(|c| c.residual))
            }),
        }
    }
    let mut only_if = 0;
    for case in 0..10_000 {
        let n = 1 + case % 8;
        let t = random_contraction(&mut rng, n);
        let f = random_vector(&mut rng, n, 3.0);
        match verify_only_if(&t, &f, 1e-9) {
            Ok(true) => only_if += 1,
            other => fails.check(false, || format!("only-if case {case}: {other:?}")),
        }
    }
    fails.outcome(format!(
        "200 constructed (max residual/(1+‖f‖∞) {worst_res:.1e}, max abs sum {worst_norm:.12}), \
         {rejected}/200 rejected, {only_if}/10000 only-if"
    ))
}

/// Values in `{-1000..1000}/1000`, so every breakpoint of `λ ↦ E[λ ∨ |f|]`
/// lies on the `10⁻³` sweep; grid sizes divide 1000 so every breakpoint of
/// `t ↦ ∫_0^t f#` does too.
fn equivalence() -> Outcome {
    const SIZES: [usize; 6] = [1, 2, 4, 5, 8, 10];
    let mut rng = rng(5);
    let mut fails = Failures::default();
    let mut majorized = 0;
    let milli = |x: f64| (x * 1000.0).trunc() / 1000.0;
    for case in 0..500 {
        let nf = *SIZES.choose(&mut rng).unwrap();
        let f: Vec<f64> = (0..nf).map(|_| rng.gen_range(-1000..=1000) as f64 / 1000.0).collect();
        let g: Vec<f64> = match case % 4 {
            0 => {
                let t = random_contraction(&mut rng, nf);
                mat_vec(&t, &f).into_iter().map(|v| milli(0.9 * v)).collect()
            }
            1 => {
                let mut g = f.clone();
                g.shuffle(&mut rng);
                g.iter_mut().for_each(|v| {
                    if rng.gen_bool(0.5) {
                        *v = -*v
                    }
                });
                g
            }
            _ => {
                let ng = *SIZES.choose(&mut rng).unwrap();
                (0..ng).map(|_| rng.gen_range(-1000..=1000) as f64 / 1000.0).collect()
            }
        };
        let report = check_lambda_equivalence(&sf(f.clone()), &sf(g.clone()), 1e-9);

        let top = (f.iter().chain(&g).fold(0.0f64, |m, v| m.max(v.abs())) * 1000.0).round() as i64 + 2;
        let lambda_ok = (0..=top).all(|k| {
            let l = k as f64 / 1000.0;
            lambda_oracle(&g, l) <= lambda_oracle(&f, l) + 1e-9
        });
        let t_ok = (0..=1000).all(|k| {
            let t = k as f64 / 1000.0;
            k_oracle(&g, t) <= k_oracle(&f, t) + 1e-9
        });
        majorized += usize::from(t_ok);
        fails.check(
            report.lambda_condition == report.majorization
                && report.majorization == t_ok
                && report.lambda_condition == lambda_ok,
            || format!("case {case}: f={f:?} g={g:?} report={report:?} λ-sweep={lambda_ok} t-sweep={t_ok}"),
        );
    }
    fails.outcome(format!("500 pairs ({majorized} majorized), all four verdicts agree"))
}

fn czr() -> Outcome {
    let mut rng = rng(6);
    let mut fails = Failures::default();
    let mut worst = f64::INFINITY;
    for case in 0..10_000 {
        let nf = rng.gen_range(1..=12);
        let ng = if rng.gen_bool(0.5) { nf } else { rng.gen_range(1..=12) };
        let f = sf(random_vector(&mut rng, nf, 5.0));
        let g = sf(random_vector(&mut rng, ng, 5.0));
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let gap = czr_contraction_gap(&f, &g, p).unwrap();
            worst = worst.min(gap);
            fails.check(gap >= -1e-12, || format!("case {case} p={p}: gap {gap:e}"));
        }
    }
    fails.outcome(format!("50000 evaluations, min gap {worst:.1e}"))
}

const SHAPES: [(usize, usize); 12] = [
    (1, 2),
    (1, 3),
    (1, 4),
    (2, 2),
    (2, 3),
    (2, 4),
    (3, 2),
    (3, 3),
    (3, 4),
    (4, 2),
    (4, 3),
    (4, 4),
];

fn implication_chain() -> Outcome {
    let mut fails = Failures::default();
    let mut nodes = 0;
    for kind in [PairKind::Subordinate, PairKind::Tangent, PairKind::Operator] {
        for i in 0..120u64 {
            let (depth, n) = SHAPES[i as usize % SHAPES.len()];
            let pair = dominated_pair(kind, PairParams::new(depth, n), 7000 + i).unwrap();
            let (d, e) = (&pair.d, &pair.e);
            let sub = check_subordination(d, e).unwrap();
            let strong = check_strong_domination(d, e).unwrap();
            let weak = check_domination(d, e, 1e-9).unwrap();
            let lambda = check_lambda_condition(d, e, 1e-9).unwrap();
            for (node, &w) in weak.iter() {
                nodes += 1;
                let (s, st, l) = (*sub.get(node), *strong.get(node), *lambda.get(node));
                let path = || format!("{kind} pair {i} node {:?}", node.path_string(n));
                fails.check(!s || st, || format!("{}: subordinate but not strong", path()));
                fails.check(!st || w, || format!("{}: strong but not weakly majorized", path()));
                fails.check(w == l, || format!("{}: weak {w} vs λ {l}", path()));
                fails.check(kind == PairKind::Tangent || kind == PairKind::Operator || s, || {
                    format!("{}: subordination not satisfied", path())
                });
                fails.check(w, || format!("{}: constructed pair not dominated", path()));
                if kind == PairKind::Tangent {
                    let (db, eb) = (d.branch(node), e.branch(node));
                    let eq = (0..=n).all(|j| {
                        let t = j as f64 / n as f64;
                        (k_sorted(db, t) - k_sorted(eb, t)).abs() <= 1e-12
                    });
                    fails.check(eq && st, || format!("{}: tangent K-functionals differ", path()));
                }
            }
        }
    }
    fails.outcome(format!("360 pairs, {nodes} nodes"))
}

fn kappa_scaling() -> Outcome {
    let mut fails = Failures::default();
    let mut worst = 0.0f64;
    for i in 0..50u64 {
        let (depth, n) = SHAPES[i as usize % SHAPES.len()];
        let mut ratios = Vec::new();
        for kappa in [1.0, 2.0, 5.0] {
            let params = PairParams { depth, branching: n, kappa };
            let pair = dominated_pair(PairKind::Kappa, params, 9000 + i).unwrap();
            let report = check_kappa_domination(&pair.d, &pair.e, kappa, 1e-9).unwrap();
            fails.check(report.passes(), || format!("pair {i} κ={kappa}: check failed"));
            let nd = lp(&path_sums(&pair.d), 2.0);
            let ne = lp(&path_sums(&pair.e), 2.0);
            ratios.push(lp_norm_partial_sum(&pair.e, 2.0, depth).unwrap()
                / lp_norm_partial_sum(&pair.d, 2.0, depth).unwrap());
            fails.check((ne / nd - ratios.last().unwrap()).abs() <= 1e-9, || {
                format!("pair {i} κ={kappa}: enumeration disagrees with path walk")
            });
        }
        let dev = (ratios[1] - 2.0 * ratios[0]).abs();
        worst = worst.max(dev);
        fails.check(dev <= 1e-9, || format!("pair {i}: ratio(κ=2) {} vs 2·{}", ratios[1], ratios[0]));
    }
    fails.outcome(format!("150 pairs pass, max |r(κ=2) − 2r(κ=1)| {worst:.1e}"))
}

/// Largest observed ratio per (generator, p) over the criterion-9 sweep,
/// frozen from a reference run.
const FROZEN: [(&str, [f64; 4]); 4] = [
    ("subordinate", [0.987918, 0.987918, 0.987918, 0.987918]),
    ("tangent", [1.103824, 1.000001, 1.128326, 1.209426]),
    ("operator", [0.741518, 0.748247, 0.760448, 0.757366]),
    ("kappa", [2.207647, 2.000001, 2.256651, 2.418851]),
];

fn norm_comparison() -> Outcome {
    const PS: [f64; 4] = [1.5, 2.0, 3.0, 4.0];
    let start = Instant::now();
    let mut fails = Failures::default();
    let mut observed = Vec::new();
    for (name, frozen) in FROZEN {
        let kind: PairKind = name.parse().unwrap();
        let mut max = [0.0f64; 4];
        for i in 0..240u64 {
            let (depth, n) = SHAPES[i as usize % SHAPES.len()];
            let params = PairParams { depth, branching: n, kappa: 2.0 };
            let pair = dominated_pair(kind, params, 11_000 + i).unwrap();
            if !pair.hypothesis(1e-9).unwrap().all() {
                fails.check(false, || format!("{name} pair {i}: hypothesis failed"));
                continue;
            }
            for (k, &p) in PS.iter().enumerate() {
                let r = lp_norm_partial_sum(&pair.e, p, depth).unwrap()
                    / lp_norm_partial_sum(&pair.d, p, depth).unwrap();
                fails.check(r.is_finite(), || format!("{name} pair {i} p={p}: ratio {r}"));
                max[k] = max[k].max(r);
            }
        }
        for (k, &p) in PS.iter().enumerate() {
            fails.check(max[k] <= frozen[k] * 1.01, || {
                format!("{name} p={p}: max ratio {} above frozen {}", max[k], frozen[k])
            });
        }
        observed.push(format!(
            "{name} [{}]",
            max.iter().map(|m| format!("{m:.6}")).collect::<Vec<_>>().join(", ")
        ));
    }

    let mut worst_iso = 0.0f64;
    for i in 0..60u64 {
        let (depth, n) = SHAPES[i as usize % SHAPES.len()];
        let (d, e) = global_sign_pair(depth, n, 13_000 + i).unwrap();
        let r = lp_norm_partial_sum(&e, 2.0, depth).unwrap() / lp_norm_partial_sum(&d, 2.0, depth).unwrap();
        worst_iso = worst_iso.max((r - 1.0).abs());
        fails.check((r - 1.0).abs() <= 1e-9, || format!("global sign pair {i}: ratio {r}"));
    }

    let mut agree = 0;
    for i in 0..20u64 {
        let (depth, n) = SHAPES[3 + (i as usize % 9)];
        let p = PS[i as usize % 4];
        let t = random_tree(depth, n, 15_000 + i).unwrap();
        let exact = lp(&path_sums(&t), p);
        let mc = monte_carlo_lp(&t, p, 100_000, 15_000 + i).unwrap();
        let ok = (exact - mc.estimate).abs() <= 3.0 * mc.standard_error;
        agree += usize::from(ok);
        fails.check(ok, || {
            format!("MC config {i}: exact {exact} vs {} ± {}", mc.estimate, mc.standard_error)
        });
    }
    let secs = start.elapsed().as_secs_f64();
    fails.check(secs < 60.0, || format!("runtime {secs:.1}s"));
    fails.outcome(format!(
        "960 pairs; max ratios (p = 1.5, 2, 3, 4): {}; global-sign max |r − 1| {worst_iso:.1e}; \
         MC within 3 SE on {agree}/20; {secs:.1}s",
        observed.join("; ")
    ))
}

fn pipeline() -> Outcome {
    let mut fails = Failures::default();
    let mut worst = 0.0f64;
    let mut nodes = 0;
    for i in 0..100u64 {
        let (depth, n) = SHAPES[3 + (i as usize % 9)];
        let pair = dominated_pair(PairKind::Operator, PairParams::new(depth, n), 17_000 + i).unwrap();
        let ops: &NodeMap<Matrix> = pair.operators.as_ref().unwrap();
        let report = match proof_pipeline(&pair.d, ops, 17_000 + i, 1e-9) {
            Ok(r) => r,
            Err(e) => {
                fails.check(false, || format!("tree {i}: {e}"));
                continue;
            }
        };
        for (node, dec) in report.decompositions.iter() {
            nodes += 1;
            let d = pair.d.branch(node);
            let e = pair.e.branch(node);
            let mut combined = vec![0.0; n];
            for t in &dec.terms {
                let eps = t.theta.signum();
                for (r, &c) in t.perm.image().iter().enumerate() {
                    combined[r] += t.theta.abs() * eps * d[c];
                }
            }
            let dev = max_abs_diff(&combined, e);
            worst = worst.max(dev);
            fails.check(dev <= 1e-10, || format!("tree {i} node {:?}: deviation {dev:e}", node.path_string(n)));

            let mut h = report.sampled.branch(node).to_vec();
            let mut dd = d.to_vec();
            h.sort_by(f64::total_cmp);
            dd.sort_by(f64::total_cmp);
            fails.check(h == dd, || format!("tree {i} node {:?}: h is not a permutation of d", node.path_string(n)));
        }
    }
    fails.outcome(format!("100 trees, {nodes} nodes, max identity deviation {worst:.1e}"))
}

type Q = Ratio<i64>;
/// `(from, to, value)`.
type Pieces = Vec<(Q, Q, f64)>;

fn random_partition(rng: &mut TestRng) -> Vec<(Q, Q)> {
    const DENS: [i64; 7] = [2, 3, 4, 5, 6, 8, 10];
    let k = rng.gen_range(0..=4);
    let mut cuts: Vec<Q> = (0..k)
        .map(|_| {
            let den = *DENS.choose(rng).unwrap();
            Q::new(rng.gen_range(1..den), den)
        })
        .collect();
    cuts.push(Q::from_integer(0));
    cuts.push(Q::from_integer(1));
    cuts.sort();
    cuts.dedup();
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

fn q(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

fn value_at(pieces: &[(Q, Q, f64)], x: Q) -> f64 {
    pieces.iter().find(|(a, b, _)| *a <= x && x < *b).unwrap().2
}

fn rational_pair(rng: &mut TestRng) -> (Pieces, Pieces) {
    let mut d: Pieces = random_partition(rng)
        .into_iter()
        .map(|(a, b)| (a, b, rng.gen_range(-3.0..3.0)))
        .collect();
    if d.len() == 1 {
        d[0].2 = 0.0;
    }
    let mean: f64 = d.iter().map(|(a, b, v)| v * q(b - a)).sum();
    d.iter_mut().for_each(|p| p.2 -= mean);

    // Conditional expectation of d on another partition, shrunk and
    // reordered: weakly majorized by d, still of mean zero.
    let c = rng.gen_range(0.2..=1.0);
    let mut cells: Vec<(Q, f64)> = random_partition(rng)
        .into_iter()
        .map(|(a, b)| {
            let mass: f64 = d
                .iter()
                .map(|(x, y, v)| {
                    let lo = (*x).max(a);
                    let hi = (*y).min(b);
                    if hi > lo { v * q(hi - lo) } else { 0.0 }
                })
                .sum();
            (b - a, c * mass / q(b - a))
        })
        .collect();
    cells.shuffle(rng);
    let mut at = Q::from_integer(0);
    let e = cells
        .into_iter()
        .map(|(len, v)| {
            let piece = (at, at + len, v);
            at += len;
            piece
        })
        .collect();
    (d, e)
}

fn to_piecewise(p: &[(Q, Q, f64)]) -> PiecewiseFunction {
    PiecewiseFunction::new(
        p.iter()
            .map(|&(from, to, value)| Piece { from, to, value })
            .collect(),
    )
    .unwrap()
}

fn grid_approximation() -> Outcome {
    let mut rng = rng(11);
    let mut fails = Failures::default();
    let mut worst_err = 0.0f64;
    let mut runs = 0;
    for case in 0..200 {
        let (d, e) = rational_pair(&mut rng);
        for (k, eps) in [0.1, 0.01].into_iter().enumerate() {
            let p = [1.0, 2.0, 3.0][(case + k) % 3];
            runs += 1;
            let out = match approximate_pair(&to_piecewise(&d), &to_piecewise(&e), eps, p) {
                Ok(o) => o,
                Err(err) => {
                    fails.check(false, || format!("case {case}: {err}"));
                    continue;
                }
            };
            let n = out.n;
            let (dv, ev) = (out.d.values(), out.e.values());
            let mean_d: f64 = dv.iter().sum();
            let mean_e: f64 = ev.iter().sum();
            fails.check(mean_d == 0.0 && mean_e == 0.0, || {
                format!("case {case}: means {mean_d:e}, {mean_e:e}")
            });

            let mid = |j: usize| Q::new(2 * j as i64 + 1, 2 * n as i64);
            let d_grid: Vec<f64> = (0..n).map(|j| value_at(&d, mid(j))).collect();
            let e_grid: Vec<f64> = (0..n).map(|j| value_at(&e, mid(j))).collect();
            let diff = |a: &[f64], b: &[f64]| lp(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>(), p);
            let (de, ee) = (diff(&d_grid, dv), diff(&e_grid, ev));
            worst_err = worst_err.max(de.max(ee) / eps);
            fails.check(de <= eps && ee <= eps, || format!("case {case}: errors {de}, {ee} > ε={eps}"));

            let sweep = (0..=10_000).all(|k| {
                let t = k as f64 / 10_000.0;
                k_sorted(ev, t) <= k_sorted(dv, t) + 1e-12
            });
            fails.check(sweep, || format!("case {case}: t-sweep finds e' above d'"));
        }
    }
    fails.outcome(format!("{runs} approximations, max error/ε {worst_err:.3}"))
}

/// Random vector orthogonal to `1` and to `c`.
fn zero_sum_test_vector(rng: &mut TestRng, c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in [vec![1.0; n], c.to_vec()] {
        let mut v = v;
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let mut x = random_vector(rng, n, 1.0);
    for b in &basis {
        let dot: f64 = x.iter().zip(b).map(|(p, q)| p * q).sum();
        x.iter_mut().zip(b).for_each(|(p, q)| *p -= dot * q);
    }
    x
}

fn centering() -> Outcome {
    let mut rng = rng(12);
    let mut fails = Failures::default();
    let (mut worst_norm, mut worst_dev) = (0.0f64, 0.0f64);
    for case in 0..10_000 {
        let n = 2 + case % 7;
        let t = random_sub_doubly_stochastic(&mut rng, n);
        let c = center_cols(&center_rows(&t));
        let norm = abs_row_sums(&c).into_iter().chain(abs_col_sums(&c)).fold(0.0, f64::max);
        worst_norm = worst_norm.max(norm);
        fails.check(norm <= 4.0 + 1e-9, || format!("case {case}: norm {norm}"));

        let d = zero_sum_test_vector(&mut rng, &col_sums(&t));
        let td = mat_vec(&t, &d);
        let image_sum: f64 = td.iter().sum();
        let dev = max_abs_diff(&mat_vec(&c, &d), &td);
        worst_dev = worst_dev.max(dev);
        fails.check(image_sum.abs() <= 1e-12 && dev <= 1e-12, || {
            format!("case {case}: Σ(Td)={image_sum:e}, |Cd − Td|={dev:e}")
        });
    }
    fails.outcome(format!("10000 matrices, max abs sum {worst_norm:.4}, max action deviation {worst_dev:.1e}"))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 12] = [
        ("Birkhoff decomposition", birkhoff),
        ("signed decomposition", signed),
        ("embedding and completion", embedding),
        ("transfer operator", transfer_operator),
        ("λ-condition equivalence", equivalence),
        ("rearrangement contraction", czr),
        ("hypothesis implication chain", implication_chain),
        ("κ-scaling", kappa_scaling),
        ("norm comparison", norm_comparison),
        ("proof pipeline", pipeline),
        ("grid approximation", grid_approximation),
        ("centering bound", centering),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let status = if out.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!out.pass);
        println!(
            "{status} {:>2} {name}: {} [{:.2}s]",
            i + 1,
            out.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
