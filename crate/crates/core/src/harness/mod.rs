//! Experiment protocols.
//!
//! * Cost comparison: for many sampled cost matrices, compare the test-set
//!   expected cost of the Pareto optimizer (caps taken from the hull
//!   baseline's per-class reject rates) against the hull baseline itself.
//! * Performance-rejection sweep: for each reject level on the grid
//!   0.01, 0.03, ..., 0.29, compare the optimizer (equal per-class caps)
//!   against BA (overall cap) on test ACC, AUC and G-mean.
//!
//! Every trial and grid point owns a ChaCha stream seeded by
//! [`child_seed`]`(master, index)`, so work can be spread over threads and
//! the results stay identical.

mod costs;
mod report;
mod select;

pub use costs::{builtin_cost_models, sample_cost_matrix, CostEntry, CostModelId, CostModelSpec};
pub use report::{comparison_csv, curve_csv, stacked_counts};
pub use select::{
    select_best_under_cap, select_min_cost, EvaluatedSolution, RejectCap, SelectionMetric,
};

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{ba_optimize_with, tortorella_optimize, TortorellaResult};
use crate::data::ScoredDataset;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::metrics::{
    empirical_priors, essential_metrics, expected_cost, ClassPriors, CostMatrix, SortedScores,
    ThresholdPair,
};
use crate::moba::{evolve, MobaConfig};

/// Costs closer than this are "identical".
pub const COST_TIE_TOLERANCE: f64 = 1e-9;

/// SplitMix64 finalizer over `master` and the 1-based index.
pub fn child_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonCounts {
    pub lower: usize,
    pub higher: usize,
    pub identical: usize,
    /// Trials where the baseline could not abstain; included in `identical`.
    pub not_activated: usize,
    /// Trials where the optimizer found no feasible pair under the
    /// transferred caps and fell back to the baseline's pair; included in
    /// `identical`. Not part of the CSV report.
    pub moba_infeasible: usize,
}

impl ComparisonCounts {
    pub fn total(&self) -> usize {
        self.lower + self.higher + self.identical
    }

    fn record(&mut self, outcome: &TrialOutcome) {
        match outcome.verdict {
            Verdict::Lower => self.lower += 1,
            Verdict::Higher => self.higher += 1,
            Verdict::Identical => self.identical += 1,
        }
        self.not_activated += usize::from(!outcome.activated);
        self.moba_infeasible += usize::from(outcome.moba_infeasible);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Lower,
    Higher,
    Identical,
}

impl Verdict {
    pub fn compare(moba_cost: f64, baseline_cost: f64) -> Self {
        if (moba_cost - baseline_cost).abs() <= COST_TIE_TOLERANCE {
            Verdict::Identical
        } else if moba_cost < baseline_cost {
            Verdict::Lower
        } else {
            Verdict::Higher
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub costs: CostMatrix,
    pub activated: bool,
    pub moba_infeasible: bool,
    pub baseline: TortorellaResult,
    pub moba_thresholds: Option<ThresholdPair>,
    pub baseline_valid_cost: f64,
    pub moba_valid_cost: Option<f64>,
    pub baseline_test_cost: f64,
    pub moba_test_cost: Option<f64>,
    pub verdict: Verdict,
}

fn cost_on(
    scores: &SortedScores,
    t: ThresholdPair,
    priors: ClassPriors,
    costs: &CostMatrix,
) -> f64 {
    expected_cost(&essential_metrics(&scores.confusion(t)), priors, costs)
}

/// One cost-comparison trial for a given matrix. `cfg` supplies everything
/// but the caps, which come from the baseline's validation reject rates.
pub fn cost_trial(
    valid: &ScoredDataset,
    test: &ScoredDataset,
    costs: &CostMatrix,
    cfg: &MobaConfig,
) -> Result<TrialOutcome> {
    let valid_priors = empirical_priors(valid)?;
    let test_priors = empirical_priors(test)?;
    let test_scores = SortedScores::new(test);
    let baseline = tortorella_optimize(valid, costs, valid_priors)?;
    let baseline_test_cost = cost_on(&test_scores, baseline.thresholds, test_priors, costs);

    let mut outcome = TrialOutcome {
        costs: *costs,
        activated: baseline.activation.is_active(),
        moba_infeasible: false,
        baseline,
        moba_thresholds: None,
        baseline_valid_cost: baseline.cost,
        moba_valid_cost: None,
        baseline_test_cost,
        moba_test_cost: None,
        verdict: Verdict::Identical,
    };
    if !outcome.activated {
        return Ok(outcome);
    }

    let moba_cfg = cfg.with_caps(baseline.rpr(), baseline.rnr());
    let chosen = match evolve(valid, &moba_cfg) {
        Ok(run) => {
            let set: Vec<EvaluatedSolution> =
                run.pareto.iter().map(EvaluatedSolution::from).collect();
            let best = set[select_min_cost(&set, costs, valid_priors)?];
            outcome.moba_valid_cost = Some(expected_cost(&best.metrics, valid_priors, costs));
            best.thresholds
        }
        Err(Error::NoFeasibleSolution { .. }) => {
            outcome.moba_infeasible = true;
            outcome.moba_valid_cost = Some(baseline.cost);
            baseline.thresholds
        }
        Err(e) => return Err(e),
    };
    let moba_test_cost = cost_on(&test_scores, chosen, test_priors, costs);
    outcome.moba_thresholds = Some(chosen);
    outcome.moba_test_cost = Some(moba_test_cost);
    outcome.verdict = Verdict::compare(moba_test_cost, baseline_test_cost);
    Ok(outcome)
}

/// Runs `trials` cost-comparison trials. Trial `i` samples its matrix and
/// its optimizer seed from `child_seed(master_seed, i)`.
pub fn cost_comparison_trials(
    valid: &ScoredDataset,
    test: &ScoredDataset,
    spec: &CostModelSpec,
    trials: usize,
    cfg: &MobaConfig,
    master_seed: u64,
) -> Result<Vec<TrialOutcome>> {
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    cfg.validate()?;
    let inner = MobaConfig {
        execution: Execution::Sequential,
        ..*cfg
    };
    map_indexed(cfg.execution, trials, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(child_seed(master_seed, i as u64));
        let costs = sample_cost_matrix(spec, &mut rng);
        let trial_cfg = inner.with_seed(rng.gen());
        cost_trial(valid, test, &costs, &trial_cfg)
    })
    .into_iter()
    .collect()
}

pub fn cost_comparison_experiment(
    valid: &ScoredDataset,
    test: &ScoredDataset,
    spec: &CostModelSpec,
    trials: usize,
    cfg: &MobaConfig,
    master_seed: u64,
) -> Result<ComparisonCounts> {
    let outcomes = cost_comparison_trials(valid, test, spec, trials, cfg, master_seed)?;
    let mut counts = ComparisonCounts::default();
    for o in &outcomes {
        counts.record(o);
    }
    Ok(counts)
}

/// 0.01, 0.03, ..., 0.29.
pub fn sweep_grid() -> Vec<f64> {
    (0..15).map(|i| (1 + 2 * i) as f64 / 100.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CurveModel {
    Ba,
    Moba,
}

impl CurveModel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ba => "ba",
            Self::Moba => "moba",
        }
    }
}

impl fmt::Display for CurveModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Test-set performance of one model at one reject level. Metrics are
/// `None` when undefined on the test set (a class entirely rejected) or
/// when the optimizer found no feasible solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub reject_param: f64,
    pub model: CurveModel,
    pub acc: Option<f64>,
    pub auc: Option<f64>,
    pub gmean: Option<f64>,
    pub observed_rej: Option<f64>,
}

impl CurvePoint {
    fn from_test(
        reject_param: f64,
        model: CurveModel,
        test: &SortedScores,
        t: ThresholdPair,
    ) -> Self {
        let m = essential_metrics(&test.confusion(t));
        Self {
            reject_param,
            model,
            acc: m.acc,
            auc: m.auc,
            gmean: m.gmean,
            observed_rej: Some(m.rej),
        }
    }

    fn missing(reject_param: f64, model: CurveModel) -> Self {
        Self {
            reject_param,
            model,
            acc: None,
            auc: None,
            gmean: None,
            observed_rej: None,
        }
    }
}

/// One sweep over [`sweep_grid`]. At level `k` the optimizer runs with
/// `p_max = n_max = k` and its Pareto set is reduced with
/// [`select_best_under_cap`] on `metric`; BA runs with `k_max = k` and unit
/// costs. Output is sorted by level, then model.
pub fn curve_sweep(
    valid: &ScoredDataset,
    test: &ScoredDataset,
    cfg: &MobaConfig,
    metric: SelectionMetric,
    master_seed: u64,
) -> Result<Vec<CurvePoint>> {
    cfg.validate()?;
    valid.require_both_classes()?;
    test.require_both_classes()?;
    let test_scores = SortedScores::new(test);
    let grid = sweep_grid();
    let inner = MobaConfig {
        execution: Execution::Sequential,
        ..*cfg
    };
    let per_level = map_indexed(cfg.execution, grid.len(), |i| -> Result<[CurvePoint; 2]> {
        let k = grid[i];
        let ba = ba_optimize_with(Execution::Sequential, valid, k, 1.0, 1.0)?;
        let ba_point = CurvePoint::from_test(k, CurveModel::Ba, &test_scores, ba.thresholds);

        let moba_cfg = inner
            .with_caps(k, k)
            .with_seed(child_seed(master_seed, i as u64));
        let moba_point = match evolve(valid, &moba_cfg) {
            Ok(run) => {
                let set: Vec<EvaluatedSolution> =
                    run.pareto.iter().map(EvaluatedSolution::from).collect();
                let cap = RejectCap::PerClass { p_cap: k, n_cap: k };
                match select_best_under_cap(&set, metric, cap) {
                    Ok(j) => {
                        CurvePoint::from_test(k, CurveModel::Moba, &test_scores, set[j].thresholds)
                    }
                    Err(Error::NoEligibleSolution) => CurvePoint::missing(k, CurveModel::Moba),
                    Err(e) => return Err(e),
                }
            }
            Err(Error::NoFeasibleSolution { .. }) => CurvePoint::missing(k, CurveModel::Moba),
            Err(e) => return Err(e),
        };
        Ok([ba_point, moba_point])
    });
    let mut points = Vec::with_capacity(2 * grid.len());
    for level in per_level {
        points.extend(level?);
    }
    Ok(points)
}
