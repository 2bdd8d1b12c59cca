//! Constrained bi-objective NSGA-II over rejection thresholds.
//!
//! Each individual is a threshold pair `(t1, t2)`. On the validation set it
//! is scored by its among-classified false positive and false negative rates.
//! Pairs whose per-class reject rates exceed the caps, or with `t1 >= t2`,
//! are infeasible and get the worst objectives `(1, 1)`.
//!
//! All randomness comes from one ChaCha stream seeded by
//! [`MobaConfig::seed`]. A generation consumes it in a fixed order: every
//! tournament draw, then crossover pair by pair, then mutation child by
//! child. Evaluation draws nothing, so offspring are scored in parallel
//! without affecting the outcome.

mod hypervolume;
mod operators;
mod sorting;

pub use hypervolume::hypervolume_2d;
pub use operators::{
    mutate_value, polynomial_delta, polynomial_mutation, sbx_beta, sbx_children, sbx_crossover,
    tournament_prefers_first, tournament_selection, OperatorStats, RETRY_BUDGET,
};
pub use sorting::{
    crowding_distance_assignment, dominates, fast_nondominated_sort, FrontSet, Objectives,
};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::ScoredDataset;
use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::metrics::{essential_metrics, RejectionConfusion, SortedScores, ThresholdPair};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobaConfig {
    pub popsize: usize,
    pub gensize: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub eta_c: f64,
    pub eta_m: f64,
    pub p_max: f64,
    pub n_max: f64,
    pub seed: u64,
    /// Bounds for initialization and mutation, normally the training score range.
    pub var_lower: f64,
    pub var_upper: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for MobaConfig {
    fn default() -> Self {
        Self {
            popsize: 20,
            gensize: 100,
            crossover_prob: 0.9,
            mutation_prob: 0.5,
            eta_c: 20.0,
            eta_m: 20.0,
            p_max: 0.1,
            n_max: 0.1,
            seed: 0,
            var_lower: 0.0,
            var_upper: 1.0,
            execution: Execution::default(),
        }
    }
}

impl MobaConfig {
    pub fn with_bounds(mut self, lower: f64, upper: f64) -> Self {
        self.var_lower = lower;
        self.var_upper = upper;
        self
    }

    pub fn with_caps(mut self, p_max: f64, n_max: f64) -> Self {
        self.p_max = p_max;
        self.n_max = n_max;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.popsize < 4 || !self.popsize.is_multiple_of(2) {
            return Err(Error::param(
                "popsize",
                format!("{} must be even and >= 4", self.popsize),
            ));
        }
        if self.gensize == 0 {
            return Err(Error::param("gensize", "must be at least 1"));
        }
        let unit = |name, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::param(name, format!("{v} is not in [0, 1]")))
            }
        };
        unit("crossover_prob", self.crossover_prob)?;
        unit("mutation_prob", self.mutation_prob)?;
        unit("p_max", self.p_max)?;
        unit("n_max", self.n_max)?;
        for (name, eta) in [("eta_c", self.eta_c), ("eta_m", self.eta_m)] {
            if !(eta >= 0.0 && eta.is_finite()) {
                return Err(Error::param(name, format!("{eta} must be finite and >= 0")));
            }
        }
        if !(self.var_lower.is_finite() && self.var_upper.is_finite())
            || self.var_lower >= self.var_upper
        {
            return Err(Error::param(
                "bounds",
                format!(
                    "need finite lower < upper, got [{}, {}]",
                    self.var_lower, self.var_upper
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub thresholds: ThresholdPair,
    pub objectives: Objectives,
    pub feasible: bool,
    pub rank: usize,
    pub crowding: f64,
    /// Validation confusion matrix behind the objectives.
    pub confusion: RejectionConfusion,
}

/// Scores threshold pairs against one validation set and a pair of caps.
#[derive(Debug, Clone)]
pub struct Evaluator {
    scores: SortedScores,
    p_max: f64,
    n_max: f64,
}

impl Evaluator {
    pub fn new(valid: &ScoredDataset, p_max: f64, n_max: f64) -> Result<Self> {
        valid.require_both_classes()?;
        Ok(Self {
            scores: SortedScores::new(valid),
            p_max,
            n_max,
        })
    }

    pub fn confusion(&self, t: ThresholdPair) -> RejectionConfusion {
        if t.t1 <= t.t2 {
            self.scores.confusion(t)
        } else {
            // never feasible; swap only so the counts stay meaningful
            self.scores.confusion(ThresholdPair { t1: t.t2, t2: t.t1 })
        }
    }

    pub fn evaluate(&self, t: ThresholdPair) -> (Objectives, bool, RejectionConfusion) {
        let c = self.confusion(t);
        let feasible = t.t1 < t.t2 && c.rpr() <= self.p_max && c.rnr() <= self.n_max;
        if !feasible {
            return ([1.0, 1.0], false, c);
        }
        let m = essential_metrics(&c);
        (
            [m.fpr_cls.unwrap_or(1.0), m.fnr_cls.unwrap_or(1.0)],
            true,
            c,
        )
    }

    fn individual(&self, t: ThresholdPair) -> Individual {
        let (objectives, feasible, confusion) = self.evaluate(t);
        Individual {
            thresholds: t,
            objectives,
            feasible,
            rank: 0,
            crowding: 0.0,
            confusion,
        }
    }
}

/// One-shot evaluation; prefer [`Evaluator`] when scoring many pairs.
pub fn evaluate(
    t: ThresholdPair,
    valid: &ScoredDataset,
    p_max: f64,
    n_max: f64,
) -> Result<(Objectives, bool)> {
    let (obj, feasible, _) = Evaluator::new(valid, p_max, n_max)?.evaluate(t);
    Ok((obj, feasible))
}

/// `popsize` pairs drawn uniformly from the bounds square, redrawn until
/// `t1 < t2`.
pub fn pop_initialization<R: Rng + ?Sized>(
    cfg: &MobaConfig,
    rng: &mut R,
) -> Result<Vec<ThresholdPair>> {
    let (lo, hi) = (cfg.var_lower, cfg.var_upper);
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::param(
            "bounds",
            format!("degenerate range [{lo}, {hi}]"),
        ));
    }
    let mut pop = Vec::with_capacity(cfg.popsize);
    while pop.len() < cfg.popsize {
        let t1 = rng.gen_range(lo..=hi);
        let t2 = rng.gen_range(lo..=hi);
        if t1 < t2 {
            pop.push(ThresholdPair { t1, t2 });
        }
    }
    Ok(pop)
}

/// Sorts `pop` into fronts and stores each member's rank and crowding
/// distance (computed within its own front).
pub fn rank_population(pop: &mut [Individual]) -> FrontSet {
    let objs: Vec<Objectives> = pop.iter().map(|i| i.objectives).collect();
    let fronts = fast_nondominated_sort(&objs);
    for (rank, front) in fronts.fronts.iter().enumerate() {
        let members: Vec<Objectives> = front.iter().map(|&i| objs[i]).collect();
        for (&i, d) in front.iter().zip(crowding_distance_assignment(&members)) {
            pop[i].rank = rank;
            pop[i].crowding = d;
        }
    }
    fronts
}

/// Keeps the best `popsize` members of `combined`: whole fronts in rank
/// order while they fit, then the overflowing front by descending crowding
/// distance.
pub fn elite_preservation(mut combined: Vec<Individual>, popsize: usize) -> Vec<Individual> {
    let fronts = rank_population(&mut combined);
    let mut next = Vec::with_capacity(popsize);
    for front in &fronts.fronts {
        let room = popsize - next.len();
        if room == 0 {
            break;
        }
        if front.len() <= room {
            next.extend(front.iter().map(|&i| combined[i].clone()));
        } else {
            let mut members = front.clone();
            members.sort_by(|&a, &b| combined[b].crowding.total_cmp(&combined[a].crowding));
            next.extend(members[..room].iter().map(|&i| combined[i].clone()));
        }
    }
    next
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fpr: f64,
    pub best_fnr: f64,
    pub feasible: usize,
}

impl GenerationStats {
    fn of(generation: usize, pop: &[Individual]) -> Self {
        Self {
            generation,
            best_fpr: pop
                .iter()
                .map(|i| i.objectives[0])
                .fold(f64::INFINITY, f64::min),
            best_fnr: pop
                .iter()
                .map(|i| i.objectives[1])
                .fold(f64::INFINITY, f64::min),
            feasible: pop.iter().filter(|i| i.feasible).count(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolveResult {
    pub population: Vec<Individual>,
    /// Feasible members of the final first front, sorted by `(fpr, fnr, t1, t2)`.
    pub pareto: Vec<Individual>,
    /// Generation 0 is the initial population.
    pub history: Vec<GenerationStats>,
    pub operator_stats: OperatorStats,
}

/// Offspring of one generation, before evaluation.
fn make_offspring<R: Rng + ?Sized>(
    pop: &[Individual],
    cfg: &MobaConfig,
    rng: &mut R,
    stats: &mut OperatorStats,
) -> Vec<ThresholdPair> {
    let winners = tournament_selection(pop, cfg.popsize, rng);
    let mut children = Vec::with_capacity(cfg.popsize);
    for pair in winners.chunks_exact(2) {
        let (a, b) = sbx_crossover(
            pop[pair[0]].thresholds,
            pop[pair[1]].thresholds,
            cfg.crossover_prob,
            cfg.eta_c,
            rng,
            stats,
        );
        children.push(a);
        children.push(b);
    }
    for child in &mut children {
        *child = polynomial_mutation(
            *child,
            cfg.mutation_prob,
            cfg.eta_m,
            cfg.var_lower,
            cfg.var_upper,
            rng,
            stats,
        );
    }
    children
}

/// Runs the full generational loop on `valid`.
pub fn evolve(valid: &ScoredDataset, cfg: &MobaConfig) -> Result<EvolveResult> {
    cfg.validate()?;
    let evaluator = Evaluator::new(valid, cfg.p_max, cfg.n_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut stats = OperatorStats::default();

    let init = pop_initialization(cfg, &mut rng)?;
    let mut pop = map_slice(cfg.execution, &init, |&t| evaluator.individual(t));
    rank_population(&mut pop);
    let mut history = vec![GenerationStats::of(0, &pop)];

    for generation in 1..=cfg.gensize {
        let children = make_offspring(&pop, cfg, &mut rng, &mut stats);
        let offspring = map_slice(cfg.execution, &children, |&t| evaluator.individual(t));
        pop.extend(offspring);
        pop = elite_preservation(pop, cfg.popsize);
        history.push(GenerationStats::of(generation, &pop));
    }

    let mut pareto: Vec<Individual> = pop
        .iter()
        .filter(|i| i.rank == 0 && i.feasible)
        .cloned()
        .collect();
    if pareto.is_empty() {
        return Err(Error::NoFeasibleSolution {
            p_max: cfg.p_max,
            n_max: cfg.n_max,
        });
    }
    pareto.sort_by(|a, b| {
        a.objectives[0]
            .total_cmp(&b.objectives[0])
            .then(a.objectives[1].total_cmp(&b.objectives[1]))
            .then(a.thresholds.t1.total_cmp(&b.thresholds.t1))
            .then(a.thresholds.t2.total_cmp(&b.thresholds.t2))
    });
    Ok(EvolveResult {
        population: pop,
        pareto,
        history,
        operator_stats: stats,
    })
}
