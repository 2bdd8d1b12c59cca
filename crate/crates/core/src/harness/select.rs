//! Picking one classifier from a Pareto set, either by expected cost (when a
//! cost matrix is known) or by a performance metric under reject caps.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::SolutionRecord;
use crate::metrics::{
    essential_metrics, expected_cost, ClassPriors, CostMatrix, EssentialMetrics,
    RejectionConfusion, ThresholdPair,
};
use crate::moba::Individual;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedSolution {
    pub thresholds: ThresholdPair,
    pub confusion: RejectionConfusion,
    pub metrics: EssentialMetrics,
}

impl EvaluatedSolution {
    pub fn new(thresholds: ThresholdPair, confusion: RejectionConfusion) -> Self {
        Self {
            thresholds,
            confusion,
            metrics: essential_metrics(&confusion),
        }
    }
}

impl From<&Individual> for EvaluatedSolution {
    fn from(ind: &Individual) -> Self {
        Self::new(ind.thresholds, ind.confusion)
    }
}

impl From<&SolutionRecord> for EvaluatedSolution {
    fn from(r: &SolutionRecord) -> Self {
        Self::new(r.thresholds(), r.confusion)
    }
}

fn tie_break(a: &EvaluatedSolution, b: &EvaluatedSolution) -> Ordering {
    a.metrics
        .rej
        .total_cmp(&b.metrics.rej)
        .then(a.thresholds.t1.total_cmp(&b.thresholds.t1))
        .then(a.thresholds.t2.total_cmp(&b.thresholds.t2))
}

/// Index of the solution with the lowest expected cost; ties go to the
/// lower reject rate, then the smaller thresholds.
pub fn select_min_cost(
    pareto: &[EvaluatedSolution],
    costs: &CostMatrix,
    priors: ClassPriors,
) -> Result<usize> {
    let cost = |s: &EvaluatedSolution| expected_cost(&s.metrics, priors, costs);
    (0..pareto.len())
        .min_by(|&a, &b| {
            cost(&pareto[a])
                .total_cmp(&cost(&pareto[b]))
                .then_with(|| tie_break(&pareto[a], &pareto[b]))
        })
        .ok_or(Error::EmptySolutionSet)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SelectionMetric {
    Acc,
    Auc,
    G,
}

impl SelectionMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Acc => "acc",
            Self::Auc => "auc",
            Self::G => "g",
        }
    }

    pub fn value(self, m: &EssentialMetrics) -> Option<f64> {
        match self {
            Self::Acc => m.acc,
            Self::Auc => m.auc,
            Self::G => m.gmean,
        }
    }
}

impl fmt::Display for SelectionMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SelectionMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "acc" => Ok(Self::Acc),
            "auc" => Ok(Self::Auc),
            "g" | "gmean" => Ok(Self::G),
            _ => Err(Error::param(
                "metric",
                format!("`{s}` is not acc, auc or g"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RejectCap {
    PerClass { p_cap: f64, n_cap: f64 },
    Overall(f64),
}

impl RejectCap {
    pub fn admits(&self, m: &EssentialMetrics) -> bool {
        match *self {
            RejectCap::PerClass { p_cap, n_cap } => m.rpr <= p_cap && m.rnr <= n_cap,
            RejectCap::Overall(k) => m.rej <= k,
        }
    }
}

/// Index of the best solution by `metric` among those the cap admits.
/// Solutions whose metric is undefined are not eligible.
pub fn select_best_under_cap(
    pareto: &[EvaluatedSolution],
    metric: SelectionMetric,
    cap: RejectCap,
) -> Result<usize> {
    if pareto.is_empty() {
        return Err(Error::EmptySolutionSet);
    }
    pareto
        .iter()
        .enumerate()
        .filter(|(_, s)| cap.admits(&s.metrics))
        .filter_map(|(i, s)| metric.value(&s.metrics).map(|v| (i, v)))
        .min_by(|(a, va), (b, vb)| {
            vb.total_cmp(va)
                .then_with(|| tie_break(&pareto[*a], &pareto[*b]))
        })
        .map(|(i, _)| i)
        .ok_or(Error::NoEligibleSolution)
}
