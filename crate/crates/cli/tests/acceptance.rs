//! Acceptance suite. Runs without the libtest harness so that the
//! PASS/FAIL lines are always printed; exits non-zero if any check fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use moba_core::baselines::{ba_optimize, tortorella_optimize};
use moba_core::data::{
    stratified_split, synth_two_gaussian, write_scored_csv, Label, ScoredDataset, SplitSpec, Splits,
};
use moba_core::harness::{
    cost_comparison_experiment, curve_sweep, sample_cost_matrix, sweep_grid, CostModelId,
    CurveModel, SelectionMetric,
};
use moba_core::metrics::{
    classify_with_rejection, empirical_priors, essential_metrics, expected_cost, ClassPriors,
    CostMatrix, RejectionConfusion, ThresholdPair,
};
use moba_core::moba::{
    crowding_distance_assignment, dominates, evolve, fast_nondominated_sort, hypervolume_2d,
    mutate_value, polynomial_delta, polynomial_mutation, sbx_beta, sbx_children, sbx_crossover,
    MobaConfig, Objectives, OperatorStats,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn splits(n_pos: usize, n_neg: usize, mu: f64, data_seed: u64, split_seed: u64) -> Splits {
    let d = synth_two_gaussian(n_pos, n_neg, mu, -mu, 1.0, data_seed).unwrap();
    stratified_split(&d, &SplitSpec::standard(split_seed)).unwrap()
}

fn bounded(cfg: MobaConfig, s: &Splits) -> MobaConfig {
    let (lo, hi) = s.train.score_range().unwrap();
    cfg.with_bounds(lo, hi)
}

/// Midpoints between consecutive distinct scores plus one sentinel on each side.
fn oracle_candidates(data: &ScoredDataset) -> Vec<f64> {
    let mut s: Vec<f64> = data.examples().iter().map(|e| e.score).collect();
    s.sort_by(f64::total_cmp);
    s.dedup();
    let mut c = vec![s[0] - 1.0];
    c.extend(s.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    c.push(s[s.len() - 1] + 1.0);
    c
}

/// Straight count over the examples, no sorting.
fn direct_counts(data: &ScoredDataset, t1: f64, t2: f64) -> RejectionConfusion {
    let mut c = RejectionConfusion::default();
    for e in data.examples() {
        let slot = match (e.label, e.score > t2, e.score <= t1) {
            (Label::Positive, true, _) => &mut c.tp,
            (Label::Positive, _, true) => &mut c.fn_,
            (Label::Positive, _, _) => &mut c.rp,
            (Label::Negative, true, _) => &mut c.fp,
            (Label::Negative, _, true) => &mut c.tn,
            (Label::Negative, _, _) => &mut c.rn,
        };
        *slot += 1;
    }
    c
}

fn ratio_or_one(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

fn pareto_oracle() -> Outcome {
    let (p_max, n_max) = (0.1, 0.1);
    let mut worst_ratio = f64::INFINITY;
    let mut slowest = Duration::ZERO;
    let mut failures = 0;
    for seed in 0..10u64 {
        let s = splits(500, 500, 0.84, 7000 + seed, seed);
        assert_eq!(s.valid.len(), 200);
        let cands = oracle_candidates(&s.valid);
        let mut feasible: Vec<Objectives> = Vec::new();
        for i in 0..cands.len() {
            for j in i..cands.len() {
                let c = direct_counts(&s.valid, cands[i], cands[j]);
                let rpr = c.rp as f64 / (c.tp + c.fn_ + c.rp) as f64;
                let rnr = c.rn as f64 / (c.fp + c.tn + c.rn) as f64;
                if rpr <= p_max && rnr <= n_max {
                    feasible.push([
                        ratio_or_one(c.fp, c.fp + c.tn),
                        ratio_or_one(c.fn_, c.fn_ + c.tp),
                    ]);
                }
            }
        }
        let oracle = hypervolume_2d(&feasible, [1.0, 1.0]);

        let cfg = bounded(MobaConfig::default(), &s)
            .with_caps(p_max, n_max)
            .with_seed(seed);
        let start = Instant::now();
        let run = evolve(&s.valid, &cfg).unwrap();
        let took = start.elapsed();
        slowest = slowest.max(took);
        let found: Vec<Objectives> = run.pareto.iter().map(|i| i.objectives).collect();
        let ratio = hypervolume_2d(&found, [1.0, 1.0]) / oracle;
        worst_ratio = worst_ratio.min(ratio);
        if ratio < 0.95 || took >= Duration::from_secs(10) {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("worst HV ratio {worst_ratio:.4} over 10 seeds, slowest run {slowest:.2?}"),
    )
}

fn naive_ranks(objs: &[Objectives]) -> Vec<usize> {
    let n = objs.len();
    let mut rank = vec![usize::MAX; n];
    let mut left: Vec<usize> = (0..n).collect();
    let mut r = 0;
    while !left.is_empty() {
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| dominates(&objs[j], &objs[i])))
            .collect();
        for &i in &front {
            rank[i] = r;
        }
        left.retain(|i| !front.contains(i));
        r += 1;
    }
    rank
}

fn sort_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=64);
        // coarse grid on half the populations so ties and duplicates show up
        let coarse = rng.gen_bool(0.5);
        let objs: Vec<Objectives> = (0..n)
            .map(|_| {
                let mut p = [rng.gen::<f64>(), rng.gen::<f64>()];
                if coarse {
                    p = p.map(|v| (v * 5.0).floor() / 5.0);
                }
                p
            })
            .collect();
        if fast_nondominated_sort(&objs).ranks(n) != naive_ranks(&objs) {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("{mismatches} mismatches in 1000 populations"),
    )
}

fn operator_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut stats = OperatorStats::default();
    let mut max_drift: f64 = 0.0;
    for _ in 0..100_000 {
        let mut pair = || {
            let a = rng.gen_range(-5.0..5.0);
            ThresholdPair::new(a, a + rng.gen_range(1e-6..3.0)).unwrap()
        };
        let (p1, p2) = (pair(), pair());
        let (c1, c2) = sbx_crossover(p1, p2, 1.0, 20.0, &mut rng, &mut stats);
        max_drift = max_drift
            .max(((c1.t1 + c2.t1) - (p1.t1 + p2.t1)).abs() / 2.0)
            .max(((c1.t2 + c2.t2) - (p1.t2 + p2.t2)).abs() / 2.0);
    }
    // the bare formula, over the full range of u
    for _ in 0..100_000 {
        let (x1, x2) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let (a, b) = sbx_children(x1, x2, sbx_beta(rng.gen(), 20.0));
        max_drift = max_drift.max(((a + b) - (x1 + x2)).abs() / 2.0);
    }

    let mut swap_ok = true;
    let mut identity_ok = true;
    for _ in 0..1000 {
        let (x1, x2) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        swap_ok &= sbx_children(x1, x2, sbx_beta(0.5, 20.0)) == (x2, x1);
        let x = rng.gen_range(-1.0..1.0);
        identity_ok &= mutate_value(x, polynomial_delta(0.5, 20.0), -1.0, 1.0) == x;
    }

    let mut out_of_bounds = 0;
    for _ in 0..100_000 {
        let (lo, hi) = (rng.gen_range(-3.0..0.0), rng.gen_range(0.1..3.0));
        let a = rng.gen_range(lo..hi);
        let x = ThresholdPair::new(a, rng.gen_range(a..=hi).max(a + 1e-9).min(hi))
            .unwrap_or(ThresholdPair { t1: lo, t2: hi });
        let m = polynomial_mutation(
            x,
            1.0,
            rng.gen_range(0.0..40.0),
            lo,
            hi,
            &mut rng,
            &mut stats,
        );
        let v = mutate_value(
            rng.gen_range(lo..=hi),
            polynomial_delta(rng.gen(), 20.0),
            lo,
            hi,
        );
        for y in [m.t1, m.t2, v] {
            if !(lo..=hi).contains(&y) {
                out_of_bounds += 1;
            }
        }
    }
    outcome(
        max_drift <= 1e-9 && swap_ok && identity_ok && out_of_bounds == 0,
        format!(
            "max mean drift {max_drift:.2e}, u=0.5 swap {swap_ok}, u=0.5 identity {identity_ok}, {out_of_bounds} out of bounds"
        ),
    )
}

fn crowding() -> Outcome {
    let front: Vec<Objectives> = vec![[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]];
    let d = crowding_distance_assignment(&front);
    let exact = d[0] == f64::INFINITY && d[1] == 2.0 && d[2] == f64::INFINITY;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut max_change: f64 = 0.0;
    for _ in 0..500 {
        let n = rng.gen_range(3..30);
        let pts: Vec<Objectives> = (0..n).map(|_| [rng.gen(), rng.gen()]).collect();
        let base = crowding_distance_assignment(&pts);
        let which = rng.gen_range(0..2);
        let (a, b) = (rng.gen_range(0.1..100.0), rng.gen_range(-50.0..50.0));
        let scaled: Vec<Objectives> = pts
            .iter()
            .map(|p| {
                let mut q = *p;
                q[which] = a * q[which] + b;
                q
            })
            .collect();
        for (x, y) in base.iter().zip(crowding_distance_assignment(&scaled)) {
            if x.is_finite() || y.is_finite() {
                max_change = max_change.max((x - y).abs());
            }
        }
    }
    outcome(
        exact && max_change <= 1e-12,
        format!("distances {d:?}, max change under rescaling {max_change:.2e}"),
    )
}

fn constraint_compliance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut violations, mut checked, mut no_feasible) = (0, 0, 0);
    for k in 0..50u64 {
        let n_pos = rng.gen_range(20..300);
        let n_neg = rng.gen_range(20..300);
        let mu = rng.gen_range(0.2..2.0);
        let s = splits(n_pos, n_neg, mu, 5000 + k, k);
        let cfg = MobaConfig {
            popsize: 2 * rng.gen_range(2..=20),
            gensize: rng.gen_range(1..=80),
            crossover_prob: rng.gen_range(0.0..=1.0),
            mutation_prob: rng.gen_range(0.0..=1.0),
            eta_c: rng.gen_range(1.0..40.0),
            eta_m: rng.gen_range(1.0..40.0),
            ..bounded(MobaConfig::default(), &s)
        }
        .with_caps(rng.gen_range(0.0..0.4), rng.gen_range(0.0..0.4))
        .with_seed(k);
        let run = match evolve(&s.valid, &cfg) {
            Ok(run) => run,
            Err(moba_core::Error::NoFeasibleSolution { .. }) => {
                no_feasible += 1;
                continue;
            }
            Err(e) => panic!("{e}"),
        };
        for ind in &run.pareto {
            checked += 1;
            let t = ind.thresholds;
            let c =
                classify_with_rejection(&s.valid, ThresholdPair { t1: t.t1, t2: t.t2 }).unwrap();
            if !(t.t1 < t.t2 && c.rpr() <= cfg.p_max && c.rnr() <= cfg.n_max) {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations in {checked} solutions ({no_feasible} configs with no feasible point)"),
    )
}

fn elitist_monotonicity() -> Outcome {
    let mut violations = 0;
    for seed in 0..20u64 {
        let s = splits(300, 300, 0.84, 6000 + seed, seed);
        let cfg = bounded(MobaConfig::default(), &s).with_seed(seed);
        let run = evolve(&s.valid, &cfg).unwrap();
        for w in run.history.windows(2) {
            if w[1].best_fpr > w[0].best_fpr || w[1].best_fnr > w[0].best_fnr {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations over 20 runs"),
    )
}

fn ba_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = 0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=60);
        let mut pairs: Vec<(f64, Label)> = (0..n)
            .map(|_| {
                let label = if rng.gen_bool(0.5) {
                    Label::Positive
                } else {
                    Label::Negative
                };
                let centre = if label == Label::Positive { 0.5 } else { -0.5 };
                // one decimal so that tied scores occur
                let score = ((centre + rng.gen_range(-1.5..1.5)) * 10.0f64).round() / 10.0;
                (score, label)
            })
            .collect();
        pairs[0].1 = Label::Positive;
        pairs[1].1 = Label::Negative;
        let data = ScoredDataset::from_pairs(pairs).unwrap();
        let k_max = rng.gen_range(0.0..=0.5);
        let (cfn, cfp) = (rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0));

        let cands = oracle_candidates(&data);
        let mut oracle = f64::INFINITY;
        for i in 0..cands.len() {
            for j in i..cands.len() {
                let c = direct_counts(&data, cands[i], cands[j]);
                let classified = c.tp + c.fn_ + c.fp + c.tn;
                if classified == 0 || (c.rp + c.rn) as f64 / n as f64 > k_max {
                    continue;
                }
                oracle = oracle.min((cfn * c.fn_ as f64 + cfp * c.fp as f64) / classified as f64);
            }
        }
        let got = ba_optimize(&data, k_max, cfn, cfp).unwrap();
        if got.objective != oracle {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("{mismatches} mismatches in 100 datasets"),
    )
}

fn tortorella_sanity() -> Outcome {
    let s = splits(350, 650, 0.84, 8000, 8);
    let priors = empirical_priors(&s.valid).unwrap();
    let cands = oracle_candidates(&s.valid);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut active, mut violations) = (0, 0);
    for _ in 0..100 {
        let costs = sample_cost_matrix(&CostModelId::Cm1.spec(), &mut rng);
        let r = tortorella_optimize(&s.valid, &costs, priors).unwrap();
        if r.activation.is_active() {
            active += 1;
            let cost = |t1, t2| {
                expected_cost(
                    &essential_metrics(&direct_counts(&s.valid, t1, t2)),
                    priors,
                    &costs,
                )
            };
            let best_single = cands
                .iter()
                .map(|&t| cost(t, t))
                .fold(f64::INFINITY, f64::min);
            let achieved = cost(r.thresholds.t1, r.thresholds.t2);
            if achieved > best_single + 1e-12 {
                violations += 1;
            }
        } else if r.thresholds.t1 != r.thresholds.t2 {
            violations += 1;
        }
    }
    // one matrix that cannot activate the reject option
    let flat = CostMatrix::new(-5.0, -5.0, 5.0, 5.0, 1.0, 1.0).unwrap();
    let r = tortorella_optimize(&s.valid, &flat, priors).unwrap();
    let inactive_ok = !r.activation.is_active() && r.thresholds.t1 == r.thresholds.t2;
    outcome(
        violations == 0 && inactive_ok,
        format!("{violations} violations over 100 CM1 matrices ({active} activated), inactive t1 = t2: {inactive_ok}"),
    )
}

fn harness_conservation() -> Outcome {
    let s = splits(350, 650, 0.84, 9000, 9);
    let cfg = bounded(MobaConfig::default(), &s);
    let c = cost_comparison_experiment(&s.valid, &s.test, &CostModelId::Cm1.spec(), 1000, &cfg, 9)
        .unwrap();
    outcome(
        c.total() == 1000 && c.not_activated <= c.identical,
        format!(
            "lower {} + higher {} + identical {} = {}, not_activated {}",
            c.lower,
            c.higher,
            c.identical,
            c.total(),
            c.not_activated
        ),
    )
}

fn tradeoff() -> Outcome {
    let grid = sweep_grid();
    let mut moba = vec![(0.0, 0usize); grid.len()];
    let mut ba = vec![(0.0, 0usize); grid.len()];
    let mut accuracy = 0.0;
    for seed in 0..20u64 {
        let s = splits(350, 650, 0.84, 1000 + seed, seed);
        let m = essential_metrics(&direct_counts(&s.test, 0.0, 0.0));
        accuracy += m.acc.unwrap() / 20.0;
        let cfg = bounded(MobaConfig::default(), &s);
        for p in curve_sweep(&s.valid, &s.test, &cfg, SelectionMetric::Auc, seed).unwrap() {
            let i = grid.iter().position(|&k| k == p.reject_param).unwrap();
            let slot = match p.model {
                CurveModel::Moba => &mut moba[i],
                CurveModel::Ba => &mut ba[i],
            };
            if let Some(a) = p.auc {
                slot.0 += a;
                slot.1 += 1;
            }
        }
    }
    let mean = |(sum, n): (f64, usize)| if n == 0 { f64::NAN } else { sum / n as f64 };
    let wins = (0..grid.len())
        .filter(|&i| mean(moba[i]) >= mean(ba[i]))
        .count();
    let frac = wins as f64 / grid.len() as f64;
    outcome(
        frac >= 0.7,
        format!(
            "MOBA >= BA on {wins}/{} levels ({:.0}%), no-reject test accuracy {accuracy:.3}",
            grid.len(),
            frac * 100.0
        ),
    )
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_moba"))
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let scores = tmp.path().join("scores.csv");
    write_scored_csv(
        &synth_two_gaussian(268, 500, 0.84, -0.84, 1.0, 11).unwrap(),
        &scores,
    )
    .unwrap();
    let scores = scores.to_str().unwrap();
    let commands: [(&str, &[&str]); 3] = [
        ("optimize", &[]),
        ("compare-costs", &["--trials", "100"]),
        ("curves", &[]),
    ];
    let mut differing = Vec::new();
    for (name, extra) in commands {
        let runs: Vec<_> = (0..2)
            .map(|r| {
                let out = tmp.path().join(format!("{name}-{r}"));
                let mut args = vec![
                    name,
                    "--scores",
                    scores,
                    "--seed",
                    "11",
                    "--out",
                    out.to_str().unwrap(),
                ];
                args.extend_from_slice(extra);
                let stdout = run_cli(&args);
                (stdout, dir_contents(&out))
            })
            .collect();
        if runs[0] != runs[1] || runs[0].1.is_empty() {
            differing.push(name);
        }
    }
    outcome(
        differing.is_empty(),
        if differing.is_empty() {
            "optimize, compare-costs and curves byte-identical across two runs".to_string()
        } else {
            format!("outputs differ for {differing:?}")
        },
    )
}

fn cost_homogeneity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut max_err: f64 = 0.0;
    for _ in 0..10_000 {
        let c = RejectionConfusion {
            tp: rng.gen_range(0..50),
            fn_: rng.gen_range(0..50),
            rp: rng.gen_range(1..50),
            fp: rng.gen_range(0..50),
            tn: rng.gen_range(0..50),
            rn: rng.gen_range(1..50),
        };
        let m = essential_metrics(&c);
        let priors = ClassPriors::from_positive(rng.gen_range(0.01..0.99)).unwrap();
        let spec = CostModelId::ALL[rng.gen_range(0..4)].spec();
        let costs = sample_cost_matrix(&spec, &mut rng);
        let lambda = rng.gen_range(0.01..10.0);
        let lhs = expected_cost(&m, priors, &costs.scaled(lambda));
        let rhs = lambda * expected_cost(&m, priors, &costs);
        max_err = max_err.max((lhs - rhs).abs());
    }
    outcome(
        max_err <= 1e-12,
        format!("max |E(lambda C) - lambda E(C)| = {max_err:.2e}"),
    )
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let checks: [(&str, Check); 12] = [
        ("pareto oracle", pareto_oracle),
        ("sort oracle", sort_oracle),
        ("operator algebra", operator_algebra),
        ("crowding", crowding),
        ("constraint compliance", constraint_compliance),
        ("elitist monotonicity", elitist_monotonicity),
        ("ba oracle", ba_oracle),
        ("tortorella sanity", tortorella_sanity),
        ("harness conservation", harness_conservation),
        ("trade-off", tradeoff),
        ("determinism", determinism),
        ("cost homogeneity", cost_homogeneity),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in checks.iter().enumerate() {
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("[{verdict}] {:>2}. {name}: {}", i + 1, o.detail);
        if !o.pass {
            failed.push(*name);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} checks passed", checks.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed {failed:?}");
        ExitCode::FAILURE
    }
}
