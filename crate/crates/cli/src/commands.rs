use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use moba_core::baselines::{ba_optimize, tortorella_optimize};
use moba_core::data::{
    load_scored_csv, stratified_split, synth_two_gaussian, write_scored_csv, SplitSpec, Splits,
};
use moba_core::export::{ParetoDocument, SolutionRecord};
use moba_core::harness::{
    comparison_csv, cost_comparison_experiment, curve_csv, curve_sweep, select_best_under_cap,
    select_min_cost, stacked_counts, CostModelId, CurveModel, CurvePoint, EvaluatedSolution,
    RejectCap, SelectionMetric,
};
use moba_core::metrics::{empirical_priors, expected_cost, ClassPriors, CostMatrix};
use moba_core::moba::{evolve, MobaConfig};
use moba_core::Error;
use serde::Serialize;

use crate::svg::{line_chart, Series};
use crate::{BaselineModel, Common, CostArgs, OptimizerArgs, SelectMode};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Core(Error),
    Io(PathBuf, std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(Error::InvalidParameter { .. }) => 1,
            CliError::Core(Error::NoFeasibleSolution { .. } | Error::NoEligibleSolution) => 3,
            CliError::Data(_) | CliError::Core(_) | CliError::Io(..) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn unit_interval(name: &str, v: f64) -> CliResult<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(usage(format!("--{name} must be in [0, 1], got {v}")))
    }
}

/// Config with everything but the search bounds, which depend on the data.
fn optimizer_config(
    opt: &OptimizerArgs,
    seed: u64,
    p_max: f64,
    n_max: f64,
) -> CliResult<MobaConfig> {
    let cfg = MobaConfig {
        popsize: opt.popsize,
        gensize: opt.gensize,
        crossover_prob: opt.pc,
        mutation_prob: opt.pm,
        eta_c: opt.eta_c,
        eta_m: opt.eta_m,
        p_max,
        n_max,
        seed,
        ..MobaConfig::default()
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn load_splits(common: &Common) -> CliResult<Splits> {
    let data = load_scored_csv(&common.scores)?;
    Ok(stratified_split(&data, &SplitSpec::standard(common.seed))?)
}

/// Search bounds come from the training scores.
fn bounded(cfg: MobaConfig, splits: &Splits) -> CliResult<MobaConfig> {
    let (lo, hi) = splits.train.score_range().ok_or(Error::AllRejected)?;
    let (lo, hi) = if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    };
    Ok(cfg.with_bounds(lo, hi))
}

fn create_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_owned(), e))
}

fn write_file(path: PathBuf, contents: &str) -> CliResult {
    fs::write(&path, contents).map_err(|e| CliError::Io(path, e))
}

fn solution_table(solutions: &[SolutionRecord]) -> String {
    let mut out = format!(
        "{:>4} {:>12} {:>12} {:>8} {:>8} {:>8} {:>8}\n",
        "#", "t1", "t2", "fpr", "fnr", "rpr", "rnr"
    );
    for (i, s) in solutions.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i:>4} {:>12.6} {:>12.6} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            s.t1, s.t2, s.fpr, s.fnr, s.rpr, s.rnr
        );
    }
    out
}

pub fn optimize(common: &Common, pmax: f64, nmax: f64, opt: &OptimizerArgs) -> CliResult {
    let cfg = optimizer_config(opt, common.seed, pmax, nmax)?;
    let splits = load_splits(common)?;
    let cfg = bounded(cfg, &splits)?;
    let run = evolve(&splits.valid, &cfg)?;
    let doc = ParetoDocument::moba(
        &cfg,
        &run.pareto,
        splits.valid.n_pos(),
        splits.valid.n_neg(),
    );

    create_dir(&common.out)?;
    let table = solution_table(&doc.solutions);
    write_file(common.out.join("pareto.json"), &doc.to_json())?;
    write_file(common.out.join("pareto.txt"), &table)?;
    print!("{table}");
    Ok(())
}

fn cost_matrix(c: &CostArgs) -> CliResult<CostMatrix> {
    let names = ["ctp", "ctn", "cfp", "cfn", "crp", "crn"];
    let vals = [c.ctp, c.ctn, c.cfp, c.cfn, c.crp, c.crn];
    let missing: Vec<_> = names
        .iter()
        .zip(vals)
        .filter(|(_, v)| v.is_none())
        .map(|(n, _)| format!("--{n}"))
        .collect();
    if !missing.is_empty() {
        return Err(usage(format!("missing cost flags: {}", missing.join(", "))));
    }
    let v = vals.map(Option::unwrap);
    CostMatrix::new(v[0], v[1], v[2], v[3], v[4], v[5]).map_err(|e| usage(e.to_string()))
}

pub fn baseline(
    common: &Common,
    model: BaselineModel,
    kmax: Option<f64>,
    costs: &CostArgs,
) -> CliResult {
    match model {
        BaselineModel::Ba => {
            let k = unit_interval(
                "kmax",
                kmax.ok_or_else(|| usage("--kmax is required for ba"))?,
            )?;
            let cfn = costs.cfn.unwrap_or(1.0);
            let cfp = costs.cfp.unwrap_or(1.0);
            if !(cfn.is_finite() && cfp.is_finite() && cfn >= 0.0 && cfp >= 0.0) {
                return Err(usage("--cfn and --cfp must be finite and non-negative"));
            }
            let splits = load_splits(common)?;
            let r = ba_optimize(&splits.valid, k, cfn, cfp)?;
            let doc = ParetoDocument::ba(&r, k, cfn, cfp);
            create_dir(&common.out)?;
            write_file(common.out.join("ba.json"), &doc.to_json())?;
            println!(
                "ba: t1={} t2={} objective={:.6} rej={:.4}",
                r.thresholds.t1,
                r.thresholds.t2,
                r.objective,
                r.confusion.reject_rate()
            );
        }
        BaselineModel::Tortorella => {
            let m = cost_matrix(costs)?;
            let splits = load_splits(common)?;
            let priors = empirical_priors(&splits.valid)?;
            let r = tortorella_optimize(&splits.valid, &m, priors)?;
            let doc = ParetoDocument::tortorella(&r, &m);
            create_dir(&common.out)?;
            write_file(common.out.join("tortorella.json"), &doc.to_json())?;
            println!(
                "tortorella: t1={} t2={} cost={:.6} reject option {}",
                r.thresholds.t1,
                r.thresholds.t2,
                r.cost,
                if r.activation.is_active() {
                    "activated"
                } else {
                    "not activated"
                }
            );
        }
    }
    Ok(())
}

pub fn compare_costs(
    common: &Common,
    cost_model: &str,
    trials: usize,
    joint_correct: bool,
    opt: &OptimizerArgs,
) -> CliResult {
    let id: CostModelId = cost_model
        .parse()
        .map_err(|e: Error| usage(e.to_string()))?;
    if trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let mut spec = id.spec();
    spec.joint_correct = joint_correct;
    let cfg = optimizer_config(opt, common.seed, 1.0, 1.0)?;
    let splits = load_splits(common)?;
    let cfg = bounded(cfg, &splits)?;
    let counts = cost_comparison_experiment(
        &splits.valid,
        &splits.test,
        &spec,
        trials,
        &cfg,
        common.seed,
    )?;

    create_dir(&common.out)?;
    write_file(
        common.out.join("comparison.csv"),
        &comparison_csv([(id.as_str(), &counts)]),
    )?;
    println!(
        "{id}: {}  (lower / higher / identical)",
        stacked_counts(&counts)
    );
    println!("not activated: {}", counts.not_activated);
    if counts.moba_infeasible > 0 {
        println!(
            "no feasible optimizer solution (baseline kept): {}",
            counts.moba_infeasible
        );
    }
    Ok(())
}

pub fn curves(common: &Common, metric: &str, opt: &OptimizerArgs) -> CliResult {
    let metric: SelectionMetric = metric.parse().map_err(|e: Error| usage(e.to_string()))?;
    let cfg = optimizer_config(opt, common.seed, 1.0, 1.0)?;
    let splits = load_splits(common)?;
    let cfg = bounded(cfg, &splits)?;
    let points = curve_sweep(&splits.valid, &splits.test, &cfg, metric, common.seed)?;

    create_dir(&common.out)?;
    write_file(common.out.join("curves.csv"), &curve_csv(&points))?;
    type Getter = fn(&CurvePoint) -> Option<f64>;
    let charts: [(&str, &str, Getter); 3] = [
        ("acc_rej.svg", "ACC", |p| p.acc),
        ("auc_rej.svg", "AUC", |p| p.auc),
        ("g_rej.svg", "G", |p| p.gmean),
    ];
    for (file, label, get) in charts {
        let series = |model: CurveModel, name| Series {
            name,
            points: points
                .iter()
                .filter(|p| p.model == model)
                .map(|p| (p.reject_param, get(p)))
                .collect(),
        };
        let svg = line_chart(
            &format!("{label}-Rej"),
            "reject parameter",
            label,
            &[
                series(CurveModel::Moba, "MOBA"),
                series(CurveModel::Ba, "BA"),
            ],
        );
        write_file(common.out.join(file), &svg)?;
    }
    print!("{}", curve_csv(&points));
    Ok(())
}

pub struct SelectArgs {
    pub pareto: PathBuf,
    pub mode: SelectMode,
    pub out: PathBuf,
    pub costs: CostArgs,
    pub ppos: Option<f64>,
    pub metric: String,
    pub cap: Option<f64>,
    pub pcap: Option<f64>,
    pub ncap: Option<f64>,
}

#[derive(Serialize)]
struct Selected {
    mode: &'static str,
    index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected_cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metric: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    solution: SolutionRecord,
}

enum Plan {
    MinCost(CostMatrix, Option<f64>),
    Best(SelectionMetric, RejectCap),
}

pub fn select(args: &SelectArgs) -> CliResult {
    let plan = match args.mode {
        SelectMode::MinCost => {
            let ppos = args.ppos.map(|p| unit_interval("ppos", p)).transpose()?;
            Plan::MinCost(cost_matrix(&args.costs)?, ppos)
        }
        SelectMode::BestMetric => {
            let metric: SelectionMetric = args
                .metric
                .parse()
                .map_err(|e: Error| usage(e.to_string()))?;
            let cap = match (args.cap, args.pcap, args.ncap) {
                (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                    return Err(usage("--cap cannot be combined with --pcap/--ncap"))
                }
                (Some(k), None, None) => RejectCap::Overall(unit_interval("cap", k)?),
                (None, p, n) => RejectCap::PerClass {
                    p_cap: unit_interval("pcap", p.unwrap_or(1.0))?,
                    n_cap: unit_interval("ncap", n.unwrap_or(1.0))?,
                },
            };
            Plan::Best(metric, cap)
        }
    };

    let doc = ParetoDocument::read(&args.pareto).map_err(|e| match e {
        Error::InvalidParameter { reason, .. } => {
            CliError::Data(format!("{}: {reason}", args.pareto.display()))
        }
        e => CliError::Core(e),
    })?;
    let set: Vec<EvaluatedSolution> = doc.solutions.iter().map(EvaluatedSolution::from).collect();

    let selected = match plan {
        Plan::MinCost(costs, ppos) => {
            let priors = match ppos {
                Some(p) => ClassPriors::from_positive(p)?,
                None => match (doc.metadata.n_pos, doc.metadata.n_neg) {
                    (Some(p), Some(n)) if p + n > 0 => {
                        ClassPriors::from_positive(p as f64 / (p + n) as f64)?
                    }
                    _ => {
                        return Err(usage(
                            "--ppos is required: the Pareto file carries no class counts",
                        ))
                    }
                },
            };
            let i = select_min_cost(&set, &costs, priors)?;
            Selected {
                mode: "min-cost",
                index: i,
                expected_cost: Some(expected_cost(&set[i].metrics, priors, &costs)),
                metric: None,
                value: None,
                solution: doc.solutions[i],
            }
        }
        Plan::Best(metric, cap) => {
            let i = select_best_under_cap(&set, metric, cap)?;
            Selected {
                mode: "best-metric",
                index: i,
                expected_cost: None,
                metric: Some(metric.as_str()),
                value: metric.value(&set[i].metrics),
                solution: doc.solutions[i],
            }
        }
    };

    create_dir(&args.out)?;
    let mut json = serde_json::to_string_pretty(&selected).expect("selection is serializable");
    json.push('\n');
    write_file(args.out.join("selected.json"), &json)?;
    let s = &selected.solution;
    println!(
        "selected #{}: t1={} t2={} fpr={:.4} fnr={:.4} rpr={:.4} rnr={:.4}",
        selected.index, s.t1, s.t2, s.fpr, s.fnr, s.rpr, s.rnr
    );
    Ok(())
}

pub fn synth(
    out: &Path,
    n_pos: usize,
    n_neg: usize,
    mu_pos: f64,
    mu_neg: f64,
    sigma: f64,
    seed: u64,
) -> CliResult {
    let data = synth_two_gaussian(n_pos, n_neg, mu_pos, mu_neg, sigma, seed)
        .map_err(|e| usage(e.to_string()))?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_scored_csv(&data, out)?;
    Ok(())
}
