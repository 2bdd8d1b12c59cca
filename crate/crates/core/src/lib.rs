//! Abstaining binary classifiers built from confidence scores.
//!
//! Given scores and labels from any external scoring classifier, the crate
//! searches for rejection threshold pairs `(t1, t2)` that are Pareto-optimal
//! for the per-class error rates among classified examples, subject to caps
//! on the per-class reject rates. It also provides two baselines (an
//! ROC-convex-hull cost minimizer and a bounded-abstention error minimizer)
//! and the harnesses that compare them.

pub mod baselines;
pub mod data;
pub mod error;
pub mod exec;
pub mod export;
pub mod harness;
pub mod metrics;
pub mod moba;

pub use error::{Error, Result};
