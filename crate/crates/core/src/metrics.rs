//! The reject rule, the confusion matrix with rejection, and the metrics and
//! cost functions computed from it.
//!
//! Two rate families coexist. *Among-all* rates divide by every example of
//! the class (the six rates that feed the expected cost). *Among-classified*
//! rates divide by the non-rejected examples of the class (the optimizer's
//! objectives and the reported ACC/AUC/G-mean). A class that is entirely
//! rejected has no among-classified rates; those are `None`.

use serde::{Deserialize, Serialize};

use crate::data::{Label, ScoredDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPair {
    pub t1: f64,
    pub t2: f64,
}

impl ThresholdPair {
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        if !(t1.is_finite() && t2.is_finite()) {
            return Err(Error::param("thresholds", "must be finite"));
        }
        if t1 > t2 {
            return Err(Error::InvertedThresholds { t1, t2 });
        }
        Ok(Self { t1, t2 })
    }

    /// A plain binary classifier: nothing is rejected.
    pub fn single(t: f64) -> Self {
        Self { t1: t, t2: t }
    }

    pub fn width(&self) -> f64 {
        self.t2 - self.t1
    }

    pub fn predict(&self, score: f64) -> Decision {
        if score > self.t2 {
            Decision::Positive
        } else if score <= self.t1 {
            Decision::Negative
        } else {
            Decision::Reject
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Positive,
    Negative,
    Reject,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RejectionConfusion {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub rp: usize,
    pub fp: usize,
    pub tn: usize,
    pub rn: usize,
}

impl RejectionConfusion {
    pub fn n_pos(&self) -> usize {
        self.tp + self.fn_ + self.rp
    }

    pub fn n_neg(&self) -> usize {
        self.fp + self.tn + self.rn
    }

    pub fn total(&self) -> usize {
        self.n_pos() + self.n_neg()
    }

    pub fn classified(&self) -> usize {
        self.tp + self.fn_ + self.fp + self.tn
    }

    pub fn rejected(&self) -> usize {
        self.rp + self.rn
    }

    /// Rejected positives over all positives.
    pub fn rpr(&self) -> f64 {
        ratio(self.rp, self.n_pos())
    }

    /// Rejected negatives over all negatives.
    pub fn rnr(&self) -> f64 {
        ratio(self.rn, self.n_neg())
    }

    pub fn reject_rate(&self) -> f64 {
        ratio(self.rejected(), self.total())
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn ratio_opt(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Applies the reject rule to every example: `s > t2` is positive, `s <= t1`
/// negative, anything in between rejected.
pub fn classify_with_rejection(
    data: &ScoredDataset,
    t: ThresholdPair,
) -> Result<RejectionConfusion> {
    if t.t1 > t.t2 {
        return Err(Error::InvertedThresholds { t1: t.t1, t2: t.t2 });
    }
    if data.is_empty() {
        return Err(Error::param("data", "empty dataset"));
    }
    let mut c = RejectionConfusion::default();
    for e in data.examples() {
        match (e.label, t.predict(e.score)) {
            (Label::Positive, Decision::Positive) => c.tp += 1,
            (Label::Positive, Decision::Negative) => c.fn_ += 1,
            (Label::Positive, Decision::Reject) => c.rp += 1,
            (Label::Negative, Decision::Positive) => c.fp += 1,
            (Label::Negative, Decision::Negative) => c.tn += 1,
            (Label::Negative, Decision::Reject) => c.rn += 1,
        }
    }
    Ok(c)
}

/// Per-class sorted scores; answers confusion queries in `O(log n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedScores {
    pos: Vec<f64>,
    neg: Vec<f64>,
}

impl SortedScores {
    pub fn new(data: &ScoredDataset) -> Self {
        let mut pos = Vec::with_capacity(data.n_pos());
        let mut neg = Vec::with_capacity(data.n_neg());
        for e in data.examples() {
            match e.label {
                Label::Positive => pos.push(e.score),
                Label::Negative => neg.push(e.score),
            }
        }
        pos.sort_by(f64::total_cmp);
        neg.sort_by(f64::total_cmp);
        Self { pos, neg }
    }

    pub fn n_pos(&self) -> usize {
        self.pos.len()
    }

    pub fn n_neg(&self) -> usize {
        self.neg.len()
    }

    /// Number of scores `<= t` in a sorted slice.
    fn at_or_below(sorted: &[f64], t: f64) -> usize {
        sorted.partition_point(|&s| s <= t)
    }

    /// Same result as [`classify_with_rejection`] for `t1 <= t2`.
    pub fn confusion(&self, t: ThresholdPair) -> RejectionConfusion {
        debug_assert!(t.t1 <= t.t2);
        let pos_low = Self::at_or_below(&self.pos, t.t1);
        let pos_mid = Self::at_or_below(&self.pos, t.t2);
        let neg_low = Self::at_or_below(&self.neg, t.t1);
        let neg_mid = Self::at_or_below(&self.neg, t.t2);
        RejectionConfusion {
            tp: self.pos.len() - pos_mid,
            fn_: pos_low,
            rp: pos_mid - pos_low,
            fp: self.neg.len() - neg_mid,
            tn: neg_low,
            rn: neg_mid - neg_low,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EssentialMetrics {
    pub tpr_all: f64,
    pub fnr_all: f64,
    pub tnr_all: f64,
    pub fpr_all: f64,
    pub rpr: f64,
    pub rnr: f64,
    pub tpr_cls: Option<f64>,
    pub fnr_cls: Option<f64>,
    pub tnr_cls: Option<f64>,
    pub fpr_cls: Option<f64>,
    pub rej: f64,
    pub acc: Option<f64>,
    pub auc: Option<f64>,
    pub gmean: Option<f64>,
}

pub fn essential_metrics(c: &RejectionConfusion) -> EssentialMetrics {
    let (n_pos, n_neg) = (c.n_pos(), c.n_neg());
    let pos_cls = c.tp + c.fn_;
    let neg_cls = c.tn + c.fp;
    let tpr_cls = ratio_opt(c.tp, pos_cls);
    let tnr_cls = ratio_opt(c.tn, neg_cls);
    let both = tpr_cls.zip(tnr_cls);
    EssentialMetrics {
        tpr_all: ratio(c.tp, n_pos),
        fnr_all: ratio(c.fn_, n_pos),
        tnr_all: ratio(c.tn, n_neg),
        fpr_all: ratio(c.fp, n_neg),
        rpr: ratio(c.rp, n_pos),
        rnr: ratio(c.rn, n_neg),
        tpr_cls,
        fnr_cls: ratio_opt(c.fn_, pos_cls),
        tnr_cls,
        fpr_cls: ratio_opt(c.fp, neg_cls),
        rej: ratio(c.rejected(), c.total()),
        acc: ratio_opt(c.tp + c.tn, c.classified()),
        auc: both.map(|(tpr, tnr)| (tpr + tnr) / 2.0),
        gmean: both.map(|(tpr, tnr)| (tpr * tnr).sqrt()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    pub ctp: f64,
    pub ctn: f64,
    pub cfp: f64,
    pub cfn: f64,
    pub crp: f64,
    pub crn: f64,
}

impl CostMatrix {
    pub fn new(ctp: f64, ctn: f64, cfp: f64, cfn: f64, crp: f64, crn: f64) -> Result<Self> {
        let m = Self {
            ctp,
            ctn,
            cfp,
            cfn,
            crp,
            crn,
        };
        if m.entries().iter().all(|x| x.is_finite()) {
            Ok(m)
        } else {
            Err(Error::param("costs", "all six entries must be finite"))
        }
    }

    pub fn entries(&self) -> [f64; 6] {
        [self.ctp, self.ctn, self.cfp, self.cfn, self.crp, self.crn]
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            ctp: self.ctp * lambda,
            ctn: self.ctn * lambda,
            cfp: self.cfp * lambda,
            cfn: self.cfn * lambda,
            crp: self.crp * lambda,
            crn: self.crn * lambda,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassPriors {
    pub p_pos: f64,
    pub p_neg: f64,
}

impl ClassPriors {
    pub fn new(p_pos: f64, p_neg: f64) -> Result<Self> {
        if !((0.0..=1.0).contains(&p_pos) && (0.0..=1.0).contains(&p_neg)) {
            return Err(Error::param("priors", "must lie in [0, 1]"));
        }
        if (p_pos + p_neg - 1.0).abs() > 1e-12 {
            return Err(Error::param("priors", format!("sum to {}", p_pos + p_neg)));
        }
        Ok(Self { p_pos, p_neg })
    }

    pub fn from_positive(p_pos: f64) -> Result<Self> {
        Self::new(p_pos, 1.0 - p_pos)
    }
}

/// Expected cost from the six among-all rates.
pub fn expected_cost(m: &EssentialMetrics, priors: ClassPriors, costs: &CostMatrix) -> f64 {
    priors.p_pos * (costs.cfn * m.fnr_all + costs.ctp * m.tpr_all + costs.crp * m.rpr)
        + priors.p_neg * (costs.ctn * m.tnr_all + costs.cfp * m.fpr_all + costs.crn * m.rnr)
}

/// Misclassification cost per classified example.
pub fn ba_objective(c: &RejectionConfusion, cfn: f64, cfp: f64) -> Result<f64> {
    let classified = c.classified();
    if classified == 0 {
        return Err(Error::AllRejected);
    }
    Ok((cfn * c.fn_ as f64 + cfp * c.fp as f64) / classified as f64)
}

pub fn empirical_priors(data: &ScoredDataset) -> Result<ClassPriors> {
    data.require_both_classes()?;
    let p_pos = data.n_pos() as f64 / data.len() as f64;
    Ok(ClassPriors {
        p_pos,
        p_neg: 1.0 - p_pos,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ds(pairs: &[(f64, bool)]) -> ScoredDataset {
        ScoredDataset::from_pairs(
            pairs
                .iter()
                .map(|&(s, p)| (s, if p { Label::Positive } else { Label::Negative })),
        )
        .unwrap()
    }

    fn cm(tp: usize, fn_: usize, rp: usize, fp: usize, tn: usize, rn: usize) -> RejectionConfusion {
        RejectionConfusion {
            tp,
            fn_,
            rp,
            fp,
            tn,
            rn,
        }
    }

    #[test]
    fn equal_thresholds_are_a_binary_rule() {
        let d = ds(&[(0.9, true), (0.1, false)]);
        let c = classify_with_rejection(&d, ThresholdPair::single(0.5)).unwrap();
        assert_eq!(c, cm(1, 0, 0, 0, 1, 0));
    }

    #[test]
    fn five_score_example() {
        let d = ds(&[
            (0.9, true),
            (0.7, true),
            (0.6, false),
            (0.4, false),
            (0.3, true),
        ]);
        let t = ThresholdPair::new(0.35, 0.65).unwrap();
        let c = classify_with_rejection(&d, t).unwrap();
        assert_eq!(c, cm(2, 1, 0, 0, 0, 2));
        assert_eq!(SortedScores::new(&d).confusion(t), c);
    }

    #[test]
    fn inverted_thresholds_rejected() {
        let d = ds(&[(0.9, true), (0.1, false)]);
        let err = classify_with_rejection(&d, ThresholdPair { t1: 0.6, t2: 0.4 }).unwrap_err();
        assert!(matches!(err, Error::InvertedThresholds { .. }));
        assert!(ThresholdPair::new(0.6, 0.4).is_err());
    }

    #[test]
    fn ties_follow_the_rule() {
        let t = ThresholdPair::new(0.3, 0.6).unwrap();
        assert_eq!(t.predict(0.6), Decision::Reject);
        assert_eq!(t.predict(0.3), Decision::Negative);
        assert_eq!(t.predict(0.600001), Decision::Positive);
    }

    #[test]
    fn metrics_with_undefined_rates() {
        let m = essential_metrics(&cm(2, 1, 0, 0, 0, 2));
        assert_eq!(m.rpr, 0.0);
        assert_eq!(m.rnr, 1.0);
        assert_eq!(m.fnr_all, 1.0 / 3.0);
        assert_eq!(m.tpr_cls, Some(2.0 / 3.0));
        assert_eq!(m.fpr_cls, None);
        assert_eq!(m.tnr_cls, None);
        assert_eq!(m.auc, None);
        assert_eq!(m.gmean, None);
        assert_eq!(m.acc, Some(2.0 / 3.0));
    }

    #[test]
    fn perfect_classifier_metrics() {
        let m = essential_metrics(&cm(5, 0, 0, 0, 5, 0));
        assert_eq!(m.acc, Some(1.0));
        assert_eq!(m.auc, Some(1.0));
        assert_eq!(m.gmean, Some(1.0));
        assert_eq!(m.rej, 0.0);
    }

    #[test]
    fn overall_reject_rate() {
        let m = essential_metrics(&cm(3, 1, 1, 1, 3, 1));
        assert_eq!(m.rej, 0.2);
    }

    #[test]
    fn expected_cost_examples() {
        let priors = ClassPriors::new(0.5, 0.5).unwrap();
        let m = essential_metrics(&cm(3, 1, 1, 1, 3, 1));
        let zero = CostMatrix::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(expected_cost(&m, priors, &zero), 0.0);

        let perfect = essential_metrics(&cm(4, 0, 0, 0, 4, 0));
        let gains = CostMatrix::new(-1.0, -1.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(expected_cost(&perfect, priors, &gains), -1.0);

        // tpr = tnr = 0.8, fnr = fpr = 0.1, rpr = rnr = 0.1
        let m = essential_metrics(&cm(8, 1, 1, 1, 8, 1));
        let costs = CostMatrix::new(0.0, 0.0, 10.0, 10.0, 1.0, 1.0).unwrap();
        assert!((expected_cost(&m, priors, &costs) - 1.1).abs() < 1e-12);
    }

    #[test]
    fn ba_objective_examples() {
        assert_eq!(ba_objective(&cm(3, 1, 7, 1, 3, 2), 1.0, 1.0).unwrap(), 0.25);
        assert_eq!(ba_objective(&cm(3, 0, 0, 0, 3, 0), 5.0, 2.0).unwrap(), 0.0);
        assert!(matches!(
            ba_objective(&cm(0, 0, 3, 0, 0, 2), 1.0, 1.0),
            Err(Error::AllRejected)
        ));
    }

    #[test]
    fn priors_from_counts() {
        let mut pairs = vec![(0.5, true); 268];
        pairs.extend(vec![(0.1, false); 500]);
        let p = empirical_priors(&ds(&pairs)).unwrap();
        assert!((p.p_pos - 0.3490).abs() < 1e-4);
        assert_eq!(
            empirical_priors(&ds(&[(1.0, true), (0.0, false)]))
                .unwrap()
                .p_pos,
            0.5
        );
        assert!(empirical_priors(&ds(&[(1.0, false); 5])).is_err());
    }

    fn dataset_strategy() -> impl Strategy<Value = ScoredDataset> {
        // coarse grid so ties between scores and thresholds are common
        proptest::collection::vec(((0i32..20), any::<bool>()), 1..40).prop_map(|v| {
            ds(&v
                .into_iter()
                .map(|(s, l)| (s as f64 / 10.0, l))
                .collect::<Vec<_>>())
        })
    }

    proptest! {
        #[test]
        fn conservation_and_sorted_path(d in dataset_strategy(), a in 0i32..22, b in 0i32..22) {
            let (lo, hi) = (a.min(b) as f64 / 10.0 - 0.05, a.max(b) as f64 / 10.0);
            let t = ThresholdPair::new(lo, hi).unwrap();
            let c = classify_with_rejection(&d, t).unwrap();
            prop_assert_eq!(c.n_pos(), d.n_pos());
            prop_assert_eq!(c.n_neg(), d.n_neg());
            prop_assert_eq!(SortedScores::new(&d).confusion(t), c);

            let m = essential_metrics(&c);
            if d.n_pos() > 0 {
                prop_assert!((m.tpr_all + m.fnr_all + m.rpr - 1.0).abs() <= 1e-12);
            }
            if d.n_neg() > 0 {
                prop_assert!((m.tnr_all + m.fpr_all + m.rnr - 1.0).abs() <= 1e-12);
            }
            if let (Some(tpr), Some(fnr)) = (m.tpr_cls, m.fnr_cls) {
                prop_assert!((tpr + fnr - 1.0).abs() <= 1e-12);
            }
            if let (Some(tnr), Some(fpr)) = (m.tnr_cls, m.fpr_cls) {
                prop_assert!((tnr + fpr - 1.0).abs() <= 1e-12);
            }
        }

        #[test]
        fn equal_thresholds_never_reject(d in dataset_strategy(), t in -1.0f64..3.0) {
            let c = classify_with_rejection(&d, ThresholdPair::single(t)).unwrap();
            prop_assert_eq!(c.rp + c.rn, 0);
            prop_assert_eq!(essential_metrics(&c).rej, 0.0);
        }

        #[test]
        fn widening_never_rejects_less(
            d in dataset_strategy(), t1 in 0.0f64..1.0, w in 0.0f64..1.0, dw in 0.0f64..1.0,
        ) {
            let narrow = classify_with_rejection(&d, ThresholdPair::new(t1, t1 + w).unwrap()).unwrap();
            let up = classify_with_rejection(&d, ThresholdPair::new(t1, t1 + w + dw).unwrap()).unwrap();
            let down = classify_with_rejection(&d, ThresholdPair::new(t1 - dw, t1 + w).unwrap()).unwrap();
            prop_assert!(up.rp >= narrow.rp && up.rn >= narrow.rn);
            prop_assert!(down.rp >= narrow.rp && down.rn >= narrow.rn);
        }

        #[test]
        fn same_partition_same_confusion(d in dataset_strategy(), a in 0i32..20, b in 0i32..20, ja in 0.01f64..0.09, jb in 0.01f64..0.09) {
            // both pairs sit strictly between the same grid scores
            let (lo, hi) = (a.min(b) as f64 / 10.0, a.max(b) as f64 / 10.0);
            let p = ThresholdPair::new(lo + 0.01, hi + 0.01).unwrap();
            let q = ThresholdPair::new(lo + ja, hi + jb.max(if a == b { ja } else { 0.0 })).unwrap();
            prop_assert_eq!(
                classify_with_rejection(&d, p).unwrap(),
                classify_with_rejection(&d, q).unwrap()
            );
        }
    }
}
