//! Scored datasets: CSV ingestion, stratified splitting and a two-Gaussian
//! score generator.
//!
//! A dataset is the output of some external scoring classifier: one
//! real-valued confidence score for the positive class per example, plus the
//! true label.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Positive => "+1",
            Label::Negative => "-1",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "+1" => Some(Label::Positive),
            "-1" => Some(Label::Negative),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredExample {
    pub id: String,
    pub label: Label,
    pub score: f64,
}

impl ScoredExample {
    pub fn new(id: impl Into<String>, label: Label, score: f64) -> Self {
        Self {
            id: id.into(),
            label,
            score,
        }
    }
}

/// An ordered list of scored examples with cached class counts.
///
/// Scores are always finite. Either class may be empty; operations that need
/// both classes check for themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDataset {
    examples: Vec<ScoredExample>,
    n_pos: usize,
    n_neg: usize,
}

impl ScoredDataset {
    pub fn new(examples: Vec<ScoredExample>) -> Result<Self> {
        if let Some(i) = examples.iter().position(|e| !e.score.is_finite()) {
            return Err(Error::NonFiniteScore { row: i + 1 });
        }
        let n_pos = examples
            .iter()
            .filter(|e| e.label == Label::Positive)
            .count();
        let n_neg = examples.len() - n_pos;
        Ok(Self {
            examples,
            n_pos,
            n_neg,
        })
    }

    /// Builds a dataset from `(score, label)` pairs, numbering ids from 0.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, Label)>) -> Result<Self> {
        let examples = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (score, label))| ScoredExample::new(i.to_string(), label, score))
            .collect();
        Self::new(examples)
    }

    pub fn examples(&self) -> &[ScoredExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn n_pos(&self) -> usize {
        self.n_pos
    }

    pub fn n_neg(&self) -> usize {
        self.n_neg
    }

    /// Fails unless both classes have at least one example.
    pub fn require_both_classes(&self) -> Result<()> {
        if self.n_pos == 0 {
            return Err(Error::ClassTooSmall {
                class: "positive",
                needed: 1,
                found: 0,
            });
        }
        if self.n_neg == 0 {
            return Err(Error::ClassTooSmall {
                class: "negative",
                needed: 1,
                found: 0,
            });
        }
        Ok(())
    }

    /// `(min, max)` of all scores, or `None` for an empty dataset.
    pub fn score_range(&self) -> Option<(f64, f64)> {
        let mut it = self.examples.iter().map(|e| e.score);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), s| (lo.min(s), hi.max(s))))
    }

    fn subset(&self, indices: &[usize]) -> Self {
        let examples: Vec<_> = indices.iter().map(|&i| self.examples[i].clone()).collect();
        let n_pos = indices
            .iter()
            .filter(|&&i| self.examples[i].label == Label::Positive)
            .count();
        Self {
            n_neg: examples.len() - n_pos,
            n_pos,
            examples,
        }
    }
}

const HEADER: [&str; 3] = ["id", "label", "score"];

/// Parses the scores CSV format from any reader.
pub fn read_scored_csv<R: Read>(reader: R) -> Result<ScoredDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let header_ok = rdr
        .headers()
        .map(|h| h.iter().eq(HEADER.iter().copied()))
        .unwrap_or(false);
    if !header_ok {
        return Err(Error::BadHeader);
    }

    let mut examples = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::MalformedRow {
            row,
            reason: e.to_string(),
        })?;
        let (id, label, score) = (&record[0], &record[1], &record[2]);
        let label = Label::parse(label).ok_or_else(|| Error::InvalidLabel {
            row,
            value: label.to_owned(),
        })?;
        let score: f64 = score.parse().map_err(|_| Error::MalformedRow {
            row,
            reason: format!("`{score}` is not a number"),
        })?;
        if !score.is_finite() {
            return Err(Error::NonFiniteScore { row });
        }
        examples.push(ScoredExample::new(id, label, score));
    }
    ScoredDataset::new(examples)
}

pub fn load_scored_csv(path: impl AsRef<Path>) -> Result<ScoredDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    read_scored_csv(BufReader::new(file))
}

/// Renders the canonical CSV text: LF endings, shortest round-trip scores.
pub fn scored_csv_string(data: &ScoredDataset) -> String {
    let mut out = String::from("id,label,score\n");
    for e in data.examples() {
        let _ = writeln!(out, "{},{},{}", e.id, e.label.as_str(), e.score);
    }
    out
}

pub fn write_scored_csv(data: &ScoredDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, scored_csv_string(data)).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub valid_frac: f64,
    pub test_frac: f64,
    pub seed: u64,
}

impl SplitSpec {
    /// The 60/20/20 protocol.
    pub fn standard(seed: u64) -> Self {
        Self {
            train_frac: 0.6,
            valid_frac: 0.2,
            test_frac: 0.2,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, f) in [
            ("train_frac", self.train_frac),
            ("valid_frac", self.valid_frac),
            ("test_frac", self.test_frac),
        ] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::param(name, format!("{f} is not in (0, 1)")));
            }
        }
        let sum = self.train_frac + self.valid_frac + self.test_frac;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::param(
                "split fractions",
                format!("sum to {sum}, not 1"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: ScoredDataset,
    pub valid: ScoredDataset,
    pub test: ScoredDataset,
}

/// Largest-remainder allocation of `n` items over `fracs`, then at least one
/// item per bucket (taken from the largest bucket).
fn allocate(n: usize, fracs: [f64; 3]) -> [usize; 3] {
    let ideal = fracs.map(|f| f * n as f64);
    let mut counts = ideal.map(|x| x.floor() as usize);
    let mut left = n - counts.iter().sum::<usize>();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let ra = ideal[a] - ideal[a].floor();
        let rb = ideal[b] - ideal[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[k] += 1;
        left -= 1;
    }
    for k in 0..3 {
        if counts[k] == 0 {
            let donor = (0..3)
                .max_by_key(|&j| (counts[j], std::cmp::Reverse(j)))
                .unwrap();
            counts[donor] -= 1;
            counts[k] += 1;
        }
    }
    counts
}

/// Stratified three-way split. Each class is shuffled with a stream seeded
/// from `spec.seed` and dealt out by its own allocation; every split keeps
/// the original example order.
pub fn stratified_split(data: &ScoredDataset, spec: &SplitSpec) -> Result<Splits> {
    spec.validate()?;
    let fracs = [spec.train_frac, spec.valid_frac, spec.test_frac];
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut parts: [Vec<usize>; 3] = Default::default();

    for (label, class) in [(Label::Positive, "positive"), (Label::Negative, "negative")] {
        let mut idx: Vec<usize> = data
            .examples()
            .iter()
            .enumerate()
            .filter(|(_, e)| e.label == label)
            .map(|(i, _)| i)
            .collect();
        if idx.len() < 3 {
            return Err(Error::ClassTooSmall {
                class,
                needed: 3,
                found: idx.len(),
            });
        }
        idx.shuffle(&mut rng);
        let counts = allocate(idx.len(), fracs);
        let mut rest = idx.as_slice();
        for (part, &k) in parts.iter_mut().zip(&counts) {
            let (head, tail) = rest.split_at(k);
            part.extend_from_slice(head);
            rest = tail;
        }
    }

    for part in &mut parts {
        part.sort_unstable();
    }
    Ok(Splits {
        train: data.subset(&parts[0]),
        valid: data.subset(&parts[1]),
        test: data.subset(&parts[2]),
    })
}

/// Positive scores from `Normal(mu_pos, sigma)`, then negative scores from
/// `Normal(mu_neg, sigma)`, drawn from one stream seeded by `seed`.
pub fn synth_two_gaussian(
    n_pos: usize,
    n_neg: usize,
    mu_pos: f64,
    mu_neg: f64,
    sigma: f64,
    seed: u64,
) -> Result<ScoredDataset> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", format!("{sigma} is not positive")));
    }
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::param(
            "counts",
            "both classes need at least one example",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos = Normal::new(mu_pos, sigma).map_err(|e| Error::param("mu_pos", e.to_string()))?;
    let neg = Normal::new(mu_neg, sigma).map_err(|e| Error::param("mu_neg", e.to_string()))?;
    let mut pairs = Vec::with_capacity(n_pos + n_neg);
    pairs.extend((0..n_pos).map(|_| (pos.sample(&mut rng), Label::Positive)));
    pairs.extend((0..n_neg).map(|_| (neg.sample(&mut rng), Label::Negative)));
    ScoredDataset::from_pairs(pairs)
}
