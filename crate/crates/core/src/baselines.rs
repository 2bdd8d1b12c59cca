//! The two comparison models.
//!
//! * An expected-cost minimizer that picks both thresholds among the vertices
//!   of the ROC convex hull, and only abstains when the cost matrix allows
//!   rejection to pay off.
//! * The bounded-abstention (BA) model: minimize the misclassification cost
//!   per classified example subject to an overall reject-rate cap.
//!
//! Both search exhaustively over a finite candidate grid. The grid holds the
//! midpoints between consecutive distinct validation scores plus one sentinel
//! below the minimum and one above the maximum, so every achievable confusion
//! matrix is reachable.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::data::{Label, ScoredDataset};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::metrics::{
    ba_objective, essential_metrics, expected_cost, ClassPriors, CostMatrix, RejectionConfusion,
    SortedScores, ThresholdPair,
};

/// Ascending candidate thresholds: `min - 1`, the midpoints, `max + 1`.
pub fn candidate_thresholds(data: &ScoredDataset) -> Vec<f64> {
    let mut scores: Vec<f64> = data.examples().iter().map(|e| e.score).collect();
    scores.sort_by(f64::total_cmp);
    scores.dedup();
    let (Some(&lo), Some(&hi)) = (scores.first(), scores.last()) else {
        return Vec::new();
    };
    let mut out = Vec::with_capacity(scores.len() + 1);
    out.push(lo - 1.0);
    out.extend(scores.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0));
    out.push(hi + 1.0);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores above this value are predicted positive.
    pub threshold: f64,
}

/// One operating point per candidate cut, sorted by ascending fpr.
pub fn roc_points(valid: &ScoredDataset) -> Result<Vec<RocPoint>> {
    valid.require_both_classes()?;
    let (n_pos, n_neg) = (valid.n_pos() as f64, valid.n_neg() as f64);
    let mut points: Vec<RocPoint> = candidate_thresholds(valid)
        .into_iter()
        .rev()
        .map(|t| {
            let (mut tp, mut fp) = (0usize, 0usize);
            for e in valid.examples().iter().filter(|e| e.score > t) {
                match e.label {
                    Label::Positive => tp += 1,
                    Label::Negative => fp += 1,
                }
            }
            RocPoint {
                fpr: fp as f64 / n_neg,
                tpr: tp as f64 / n_pos,
                threshold: t,
            }
        })
        .collect();
    points.sort_by(|a, b| a.fpr.total_cmp(&b.fpr).then(a.tpr.total_cmp(&b.tpr)));
    Ok(points)
}

fn cross(o: &RocPoint, a: &RocPoint, b: &RocPoint) -> f64 {
    (a.fpr - o.fpr) * (b.tpr - o.tpr) - (a.tpr - o.tpr) * (b.fpr - o.fpr)
}

/// Upper convex hull of ROC points. Collinear points are dropped.
pub fn rocch(points: &[RocPoint]) -> Vec<RocPoint> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.fpr.total_cmp(&b.fpr).then(a.tpr.total_cmp(&b.tpr)));
    let mut hull: Vec<RocPoint> = Vec::with_capacity(sorted.len());
    for p in sorted {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], &p) >= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull
}

/// Whether a cost matrix lets abstention beat every plain classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectActivation {
    Active,
    Inactive,
    /// `CFN = CRP` or `CTP = CRP`; treated as inactive.
    DegenerateDenominator,
}

impl RejectActivation {
    pub fn is_active(self) -> bool {
        self == RejectActivation::Active
    }
}

/// `(CTN - CRN) / (CFN - CRP) > (CFP - CRN) / (CTP - CRP)`.
pub fn reject_activation(costs: &CostMatrix) -> RejectActivation {
    let left_den = costs.cfn - costs.crp;
    let right_den = costs.ctp - costs.crp;
    if left_den == 0.0 || right_den == 0.0 {
        return RejectActivation::DegenerateDenominator;
    }
    if (costs.ctn - costs.crn) / left_den > (costs.cfp - costs.crn) / right_den {
        RejectActivation::Active
    } else {
        RejectActivation::Inactive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TortorellaResult {
    pub thresholds: ThresholdPair,
    /// Expected cost on the validation set.
    pub cost: f64,
    pub activation: RejectActivation,
    pub confusion: RejectionConfusion,
}

impl TortorellaResult {
    pub fn rpr(&self) -> f64 {
        self.confusion.rpr()
    }

    pub fn rnr(&self) -> f64 {
        self.confusion.rnr()
    }
}

#[derive(Debug, Clone, Copy)]
struct Scored {
    t: ThresholdPair,
    value: f64,
    rej: usize,
    confusion: RejectionConfusion,
}

/// Lower value, then fewer rejections, then a narrower band, then the
/// lexicographically smaller pair.
fn prefer(a: &Scored, b: &Scored) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then(a.rej.cmp(&b.rej))
        .then(a.t.width().total_cmp(&b.t.width()))
        .then(a.t.t1.total_cmp(&b.t.t1))
        .then(a.t.t2.total_cmp(&b.t.t2))
}

fn best(a: Option<Scored>, b: Option<Scored>) -> Option<Scored> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if prefer(&y, &x) == Ordering::Less {
            y
        } else {
            x
        }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Minimizes the expected cost over threshold pairs drawn from ROC hull
/// vertices. Without activation only `t1 = t2` pairs are considered.
pub fn tortorella_optimize(
    valid: &ScoredDataset,
    costs: &CostMatrix,
    priors: ClassPriors,
) -> Result<TortorellaResult> {
    let hull = rocch(&roc_points(valid)?);
    let mut vertices: Vec<f64> = hull.iter().map(|p| p.threshold).collect();
    vertices.sort_by(f64::total_cmp);
    let activation = reject_activation(costs);
    let scores = SortedScores::new(valid);
    let score = |t: ThresholdPair| {
        let confusion = scores.confusion(t);
        Scored {
            t,
            value: expected_cost(&essential_metrics(&confusion), priors, costs),
            rej: confusion.rejected(),
            confusion,
        }
    };

    let mut winner = None;
    for (i, &t1) in vertices.iter().enumerate() {
        if activation.is_active() {
            for &t2 in &vertices[i..] {
                winner = best(winner, Some(score(ThresholdPair { t1, t2 })));
            }
        } else {
            winner = best(winner, Some(score(ThresholdPair::single(t1))));
        }
    }
    let w = winner.expect("hull always has at least two vertices");
    Ok(TortorellaResult {
        thresholds: w.t,
        cost: w.value,
        activation,
        confusion: w.confusion,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaResult {
    pub thresholds: ThresholdPair,
    /// Misclassification cost per classified validation example.
    pub objective: f64,
    pub confusion: RejectionConfusion,
}

pub fn ba_optimize(valid: &ScoredDataset, k_max: f64, cfn: f64, cfp: f64) -> Result<BaResult> {
    ba_optimize_with(Execution::default(), valid, k_max, cfn, cfp)
}

/// Exhaustive search over ordered candidate pairs with `rej <= k_max`.
/// Rows of the pair grid (one per `t1`) are searched in parallel and
/// reduced with the same total order, so the result does not depend on
/// `exec`.
pub fn ba_optimize_with(
    exec: Execution,
    valid: &ScoredDataset,
    k_max: f64,
    cfn: f64,
    cfp: f64,
) -> Result<BaResult> {
    valid.require_both_classes()?;
    if !(0.0..=1.0).contains(&k_max) {
        return Err(Error::param("k_max", format!("{k_max} is not in [0, 1]")));
    }
    if !(cfn.is_finite() && cfp.is_finite()) {
        return Err(Error::param("cfn/cfp", "must be finite"));
    }
    let cands = candidate_thresholds(valid);
    let scores = SortedScores::new(valid);
    let (n_pos, n_neg) = (valid.n_pos(), valid.n_neg());
    let total = valid.len();
    // counts at or below each candidate
    let below: Vec<(usize, usize)> = cands
        .iter()
        .map(|&c| {
            let r = scores.confusion(ThresholdPair::single(c));
            (r.fn_, r.tn)
        })
        .collect();

    let rows = map_indexed(exec, cands.len(), |i| {
        let mut row_best = None;
        for j in i..cands.len() {
            let (pos_lo, neg_lo) = below[i];
            let (pos_hi, neg_hi) = below[j];
            let confusion = RejectionConfusion {
                tp: n_pos - pos_hi,
                fn_: pos_lo,
                rp: pos_hi - pos_lo,
                fp: n_neg - neg_hi,
                tn: neg_lo,
                rn: neg_hi - neg_lo,
            };
            let rej = confusion.rejected();
            if rej as f64 / total as f64 > k_max {
                // wider bands only reject more
                break;
            }
            let Ok(value) = ba_objective(&confusion, cfn, cfp) else {
                continue;
            };
            let cand = Scored {
                t: ThresholdPair {
                    t1: cands[i],
                    t2: cands[j],
                },
                value,
                rej,
                confusion,
            };
            row_best = best(row_best, Some(cand));
        }
        row_best
    });
    let w = rows
        .into_iter()
        .fold(None, best)
        .expect("t1 = t2 pairs are always feasible");
    Ok(BaResult {
        thresholds: w.t,
        objective: w.value,
        confusion: w.confusion,
    })
}
