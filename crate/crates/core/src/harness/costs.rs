use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::CostMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CostEntry {
    Fixed(f64),
    Uniform { lo: f64, hi: f64 },
}

impl CostEntry {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::param("cost range", format!("[{lo}, {hi}]")));
        }
        Ok(CostEntry::Uniform { lo, hi })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            CostEntry::Fixed(v) => v,
            CostEntry::Uniform { lo, hi } if lo == hi => lo,
            CostEntry::Uniform { lo, hi } => rng.gen_range(lo..=hi),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match *self {
            CostEntry::Fixed(v) => x == v,
            CostEntry::Uniform { lo, hi } => (lo..=hi).contains(&x),
        }
    }
}

/// A distribution over cost matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModelSpec {
    pub ctp: CostEntry,
    pub ctn: CostEntry,
    pub cfp: CostEntry,
    pub cfn: CostEntry,
    pub crp: CostEntry,
    pub crn: CostEntry,
    /// Use one draw for both correct-classification costs.
    pub joint_correct: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CostModelId {
    Cm1,
    Cm2,
    Cm3,
    Cm4,
}

impl CostModelId {
    pub const ALL: [CostModelId; 4] = [Self::Cm1, Self::Cm2, Self::Cm3, Self::Cm4];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Cm1 => "cm1",
            Self::Cm2 => "cm2",
            Self::Cm3 => "cm3",
            Self::Cm4 => "cm4",
        }
    }

    pub fn spec(self) -> CostModelSpec {
        let u = |lo, hi| CostEntry::Uniform { lo, hi };
        let cm1 = CostModelSpec {
            ctp: u(-10.0, 0.0),
            ctn: u(-10.0, 0.0),
            cfp: u(0.0, 50.0),
            cfn: u(0.0, 50.0),
            crp: CostEntry::Fixed(1.0),
            crn: CostEntry::Fixed(1.0),
            joint_correct: false,
        };
        match self {
            Self::Cm1 => cm1,
            Self::Cm2 => CostModelSpec {
                cfp: u(0.0, 100.0),
                ..cm1
            },
            Self::Cm3 => CostModelSpec {
                cfn: u(0.0, 100.0),
                ..cm1
            },
            Self::Cm4 => CostModelSpec {
                crp: u(0.0, 30.0),
                crn: u(0.0, 30.0),
                ..cm1
            },
        }
    }
}

impl fmt::Display for CostModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CostModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::param("cost model", format!("`{s}` is not one of cm1..cm4")))
    }
}

/// The four built-in cost models, CM1 to CM4.
pub fn builtin_cost_models() -> [CostModelSpec; 4] {
    CostModelId::ALL.map(CostModelId::spec)
}

/// Draws each ranged entry independently, in the order ctp, ctn, cfp, cfn,
/// crp, crn (ctn is skipped when `joint_correct` is set).
pub fn sample_cost_matrix<R: Rng + ?Sized>(spec: &CostModelSpec, rng: &mut R) -> CostMatrix {
    let ctp = spec.ctp.sample(rng);
    let ctn = if spec.joint_correct {
        ctp
    } else {
        spec.ctn.sample(rng)
    };
    CostMatrix {
        ctp,
        ctn,
        cfp: spec.cfp.sample(rng),
        cfn: spec.cfn.sample(rng),
        crp: spec.crp.sample(rng),
        crn: spec.crn.sample(rng),
    }
}
