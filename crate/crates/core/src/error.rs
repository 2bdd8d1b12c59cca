use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// `row` is the 1-based data row (the header is not counted).
    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("row {row}: label `{value}` is not +1 or -1")]
    InvalidLabel { row: usize, value: String },

    #[error("row {row}: score is not finite")]
    NonFiniteScore { row: usize },

    #[error("missing or wrong header, expected `id,label,score`")]
    BadHeader,

    #[error("invalid threshold pair: t1 = {t1} > t2 = {t2}")]
    InvertedThresholds { t1: f64, t2: f64 },

    #[error("dataset needs at least {needed} example(s) of the {class} class, found {found}")]
    ClassTooSmall {
        class: &'static str,
        needed: usize,
        found: usize,
    },

    #[error("every example is rejected, the classified error rate is undefined")]
    AllRejected,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no feasible solution found under caps p_max = {p_max}, n_max = {n_max}")]
    NoFeasibleSolution { p_max: f64, n_max: f64 },

    #[error("empty solution set")]
    EmptySolutionSet,

    #[error("no solution satisfies the reject cap")]
    NoEligibleSolution,
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
