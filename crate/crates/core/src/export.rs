//! JSON documents for optimizer and baseline results.
//!
//! ```json
//! {
//!   "model": "moba",
//!   "metadata": { "seed": 42, "popsize": 20, "gensize": 100, "p_max": 0.1, "n_max": 0.1, ... },
//!   "solutions": [ { "t1": .., "t2": .., "fpr": .., "fnr": .., "rpr": .., "rnr": .., "feasible": true,
//!                    "confusion": { "tp": .., "fn": .., "rp": .., "fp": .., "tn": .., "rn": .. } } ]
//! }
//! ```
//!
//! `fpr` and `fnr` are among classified examples (a fully rejected class
//! reports 1); `rpr` and `rnr` are among all examples of the class. Counts
//! are carried so that a solution can be re-scored without the dataset.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::{BaResult, TortorellaResult};
use crate::error::{Error, Result};
use crate::metrics::{essential_metrics, CostMatrix, RejectionConfusion, ThresholdPair};
use crate::moba::{Individual, MobaConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelTag {
    Moba,
    Tortorella,
    Ba,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub t1: f64,
    pub t2: f64,
    pub fpr: f64,
    pub fnr: f64,
    pub rpr: f64,
    pub rnr: f64,
    pub feasible: bool,
    pub confusion: RejectionConfusion,
}

impl SolutionRecord {
    pub fn new(t: ThresholdPair, confusion: RejectionConfusion, feasible: bool) -> Self {
        let m = essential_metrics(&confusion);
        Self {
            t1: t.t1,
            t2: t.t2,
            fpr: m.fpr_cls.unwrap_or(1.0),
            fnr: m.fnr_cls.unwrap_or(1.0),
            rpr: m.rpr,
            rnr: m.rnr,
            feasible,
            confusion,
        }
    }

    pub fn thresholds(&self) -> ThresholdPair {
        ThresholdPair {
            t1: self.t1,
            t2: self.t2,
        }
    }
}

impl From<&Individual> for SolutionRecord {
    fn from(ind: &Individual) -> Self {
        Self::new(ind.thresholds, ind.confusion, ind.feasible)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub popsize: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gensize: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfn: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costs: Option<CostMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activated: Option<bool>,
    /// Achieved validation objective (expected cost or BA objective).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    /// Validation class counts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_pos: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_neg: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoDocument {
    pub model: ModelTag,
    pub metadata: RunMetadata,
    pub solutions: Vec<SolutionRecord>,
}

impl ParetoDocument {
    pub fn moba(cfg: &MobaConfig, pareto: &[Individual], n_pos: usize, n_neg: usize) -> Self {
        Self {
            model: ModelTag::Moba,
            metadata: RunMetadata {
                seed: Some(cfg.seed),
                popsize: Some(cfg.popsize),
                gensize: Some(cfg.gensize),
                p_max: Some(cfg.p_max),
                n_max: Some(cfg.n_max),
                n_pos: Some(n_pos),
                n_neg: Some(n_neg),
                ..Default::default()
            },
            solutions: pareto.iter().map(SolutionRecord::from).collect(),
        }
    }

    pub fn tortorella(r: &TortorellaResult, costs: &CostMatrix) -> Self {
        Self {
            model: ModelTag::Tortorella,
            metadata: RunMetadata {
                costs: Some(*costs),
                activated: Some(r.activation.is_active()),
                objective: Some(r.cost),
                n_pos: Some(r.confusion.n_pos()),
                n_neg: Some(r.confusion.n_neg()),
                ..Default::default()
            },
            solutions: vec![SolutionRecord::new(r.thresholds, r.confusion, true)],
        }
    }

    pub fn ba(r: &BaResult, k_max: f64, cfn: f64, cfp: f64) -> Self {
        Self {
            model: ModelTag::Ba,
            metadata: RunMetadata {
                k_max: Some(k_max),
                cfn: Some(cfn),
                cfp: Some(cfp),
                objective: Some(r.objective),
                n_pos: Some(r.confusion.n_pos()),
                n_neg: Some(r.confusion.n_neg()),
                ..Default::default()
            },
            solutions: vec![SolutionRecord::new(r.thresholds, r.confusion, true)],
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document is always serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::param("pareto json", e.to_string()))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }
}
