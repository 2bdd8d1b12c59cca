//! Binary tournament selection, simulated binary crossover and polynomial
//! mutation on threshold pairs.
//!
//! Both variation operators keep `t1 < t2` by redrawing their uniform
//! numbers, at most [`RETRY_BUDGET`] times. When the budget runs out the
//! parents (or the unmutated input) are returned and the fallback is counted
//! in [`OperatorStats`].

use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Individual;
use crate::metrics::ThresholdPair;

pub const RETRY_BUDGET: usize = 100;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorStats {
    /// Children replaced by a parent copy after the retry budget ran out.
    pub crossover_fallbacks: usize,
    pub mutation_fallbacks: usize,
}

fn ordered(t1: f64, t2: f64) -> Option<ThresholdPair> {
    (t1 < t2 && t1.is_finite() && t2.is_finite()).then_some(ThresholdPair { t1, t2 })
}

/// `true` when `a` beats `b`: lower rank, then larger crowding distance.
/// A full tie goes to `a`.
pub fn tournament_prefers_first(a: &Individual, b: &Individual) -> bool {
    match a.rank.cmp(&b.rank) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => a.crowding >= b.crowding,
    }
}

/// Runs `n` binary tournaments with contestants drawn uniformly (with
/// replacement) and returns the winners' indices.
pub fn tournament_selection<R: Rng + ?Sized>(
    pop: &[Individual],
    n: usize,
    rng: &mut R,
) -> Vec<usize> {
    (0..n)
        .map(|_| {
            let a = rng.gen_range(0..pop.len());
            let b = rng.gen_range(0..pop.len());
            if tournament_prefers_first(&pop[a], &pop[b]) {
                a
            } else {
                b
            }
        })
        .collect()
}

/// Spread factor from a uniform draw `u` in (0, 1).
pub fn sbx_beta(u: f64, eta_c: f64) -> f64 {
    let e = 1.0 / (eta_c + 1.0);
    if u <= 0.5 {
        (2.0 * u).powf(e)
    } else {
        1.0 / (2.0 - 2.0 * u).powf(e)
    }
}

/// The two children of one variable for spread factor `beta`.
pub fn sbx_children(x1: f64, x2: f64, beta: f64) -> (f64, f64) {
    (
        0.5 * ((1.0 - beta) * x1 + (1.0 + beta) * x2),
        0.5 * ((1.0 + beta) * x1 + (1.0 - beta) * x2),
    )
}

/// SBX on a pair of parents. With probability `1 - crossover_prob` the
/// children are copies. Otherwise each attempt draws one `u` per variable;
/// the first attempt whose two children both satisfy `t1 < t2` is kept, and
/// the parents are returned unchanged once the retry budget runs out.
pub fn sbx_crossover<R: Rng + ?Sized>(
    x1: ThresholdPair,
    x2: ThresholdPair,
    crossover_prob: f64,
    eta_c: f64,
    rng: &mut R,
    stats: &mut OperatorStats,
) -> (ThresholdPair, ThresholdPair) {
    if rng.gen::<f64>() >= crossover_prob {
        return (x1, x2);
    }
    for _ in 0..RETRY_BUDGET {
        let b1 = sbx_beta(rng.sample(Open01), eta_c);
        let b2 = sbx_beta(rng.sample(Open01), eta_c);
        let (a1, a2) = sbx_children(x1.t1, x2.t1, b1);
        let (c1, c2) = sbx_children(x1.t2, x2.t2, b2);
        if let (Some(y1), Some(y2)) = (ordered(a1, c1), ordered(a2, c2)) {
            return (y1, y2);
        }
    }
    stats.crossover_fallbacks += 1;
    (x1, x2)
}

/// Perturbation from a uniform draw `u` in (0, 1); lies in [-1, 1].
pub fn polynomial_delta(u: f64, eta_m: f64) -> f64 {
    let e = 1.0 / (eta_m + 1.0);
    if u < 0.5 {
        (2.0 * u).powf(e) - 1.0
    } else {
        1.0 - (2.0 - 2.0 * u).powf(e)
    }
}

/// `x + (upper - lower) * delta`, clamped to `[lower, upper]`.
pub fn mutate_value(x: f64, delta: f64, lower: f64, upper: f64) -> f64 {
    (x + (upper - lower) * delta).clamp(lower, upper)
}

/// Polynomial mutation. Each variable is selected for mutation with
/// probability `mutation_prob`; the selected variables get fresh `u` draws
/// until the result satisfies `t1 < t2`.
pub fn polynomial_mutation<R: Rng + ?Sized>(
    x: ThresholdPair,
    mutation_prob: f64,
    eta_m: f64,
    lower: f64,
    upper: f64,
    rng: &mut R,
    stats: &mut OperatorStats,
) -> ThresholdPair {
    let mask = [
        rng.gen::<f64>() < mutation_prob,
        rng.gen::<f64>() < mutation_prob,
    ];
    if !mask[0] && !mask[1] {
        return x;
    }
    for _ in 0..RETRY_BUDGET {
        let mut y = [x.t1, x.t2];
        for (v, _) in y.iter_mut().zip(mask).filter(|(_, m)| *m) {
            *v = mutate_value(
                *v,
                polynomial_delta(rng.sample(Open01), eta_m),
                lower,
                upper,
            );
        }
        if let Some(t) = ordered(y[0], y[1]) {
            return t;
        }
    }
    stats.mutation_fallbacks += 1;
    x
}
