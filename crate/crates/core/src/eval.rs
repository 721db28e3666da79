//! Accuracy measurement and repeated random-split cross-validation.
//!
//! The cross-validation protocol runs 10 independent experiments; each draws
//! a fresh uniform 90/10 train/test split from the seeded generator (these
//! are independent random partitions, not rotating folds) and reports the
//! per-run accuracies and their mean. Splits are drawn over a canonical
//! ordering of the instances, so the report depends only on the instance
//! multiset and the seed, not on input row order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::classifier::{train, InstanceBase, ModelError, TrainConfig};
use crate::data::{Dataset, Pattern};
use crate::rng::{run_seed, Rng};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction list length {predictions} does not match gold list length {gold}")]
    LengthMismatch { predictions: usize, gold: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error("dataset has {size} instances; cross-validation needs at least 10")]
    TooSmall { size: usize },
    #[error("instance {index} has no gold category")]
    MissingGold { index: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Accuracy plus the per-category counts needed for precision/recall and a
/// full confusion table.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    correct: usize,
    total: usize,
    confusion: BTreeMap<(String, String), usize>,
    tie_rate: f64,
    unknown_value_rate: f64,
}

/// Per-category row of an evaluation report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryCounts {
    pub category: String,
    /// Instances whose gold label is this category.
    pub gold: usize,
    /// Instances predicted as this category.
    pub predicted: usize,
    /// Instances where gold and prediction agree on this category.
    pub correct: usize,
}

impl EvalReport {
    fn from_pairs(pairs: &[(&str, &str)], tie_rate: f64, unknown_value_rate: f64) -> EvalReport {
        let mut confusion: BTreeMap<(String, String), usize> = BTreeMap::new();
        let mut correct = 0;
        for &(gold, predicted) in pairs {
            if gold == predicted {
                correct += 1;
            }
            *confusion
                .entry((gold.to_string(), predicted.to_string()))
                .or_insert(0) += 1;
        }
        EvalReport {
            correct,
            total: pairs.len(),
            confusion,
            tie_rate,
            unknown_value_rate,
        }
    }

    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }

    pub fn correct(&self) -> usize {
        self.correct
    }

    pub fn instance_count(&self) -> usize {
        self.total
    }

    /// Fraction of queries whose nearest distance was shared by more than
    /// one stored instance (0 for list-only evaluations).
    pub fn tie_rate(&self) -> f64 {
        self.tie_rate
    }

    /// Fraction of queries containing at least one value never observed in
    /// training (0 for list-only evaluations).
    pub fn unknown_value_rate(&self) -> f64 {
        self.unknown_value_rate
    }

    /// Gold-category × predicted-category counts.
    pub fn confusion(&self) -> &BTreeMap<(String, String), usize> {
        &self.confusion
    }

    /// Per-category precision/recall counts, sorted by category.
    pub fn per_category(&self) -> Vec<CategoryCounts> {
        let mut by_cat: BTreeMap<String, CategoryCounts> = BTreeMap::new();
        let blank = |category: &String| CategoryCounts {
            category: category.clone(),
            gold: 0,
            predicted: 0,
            correct: 0,
        };
        for ((gold, predicted), &count) in &self.confusion {
            by_cat.entry(gold.clone()).or_insert_with(|| blank(gold));
            by_cat
                .entry(predicted.clone())
                .or_insert_with(|| blank(predicted));
            by_cat.get_mut(gold).unwrap().gold += count;
            by_cat.get_mut(predicted).unwrap().predicted += count;
            if gold == predicted {
                by_cat.get_mut(gold).unwrap().correct += count;
            }
        }
        by_cat.into_values().collect()
    }

    /// Aligned text table: overall accuracy plus one precision/recall row
    /// per category.
    pub fn render(&self) -> String {
        let rows = self.per_category();
        let width = rows
            .iter()
            .map(|r| r.category.chars().count())
            .max()
            .unwrap_or(8)
            .max(8);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "accuracy: {:.4} ({}/{})",
            self.accuracy(),
            self.correct,
            self.total
        );
        let _ = writeln!(out, "tie rate: {:.4}  unknown value rate: {:.4}", self.tie_rate, self.unknown_value_rate);
        let _ = writeln!(
            out,
            "{:<width$}  {:>6}  {:>6}  {:>7}  {:>9}  {:>6}",
            "category", "gold", "pred", "correct", "precision", "recall"
        );
        for r in rows {
            let precision = if r.predicted > 0 {
                r.correct as f64 / r.predicted as f64
            } else {
                0.0
            };
            let recall = if r.gold > 0 {
                r.correct as f64 / r.gold as f64
            } else {
                0.0
            };
            let _ = writeln!(
                out,
                "{:<width$}  {:>6}  {:>6}  {:>7}  {:>9.4}  {:>6.4}",
                r.category, r.gold, r.predicted, r.correct, precision, recall
            );
        }
        out
    }

    /// Full confusion table (rows gold, columns predicted).
    pub fn render_confusion(&self) -> String {
        let mut cats: Vec<&str> = Vec::new();
        for (gold, predicted) in self.confusion.keys() {
            for c in [gold.as_str(), predicted.as_str()] {
                if !cats.contains(&c) {
                    cats.push(c);
                }
            }
        }
        cats.sort_unstable();
        let label = "gold\\pred";
        let width = cats
            .iter()
            .map(|c| c.chars().count())
            .max()
            .unwrap_or(4)
            .max(4);
        let col0 = width.max(label.chars().count());
        let mut out = String::new();
        let _ = write!(out, "{label:<col0$}");
        for c in &cats {
            let _ = write!(out, "  {c:>width$}");
        }
        out.push('\n');
        for gold in &cats {
            let _ = write!(out, "{gold:<col0$}");
            for predicted in &cats {
                let count = self
                    .confusion
                    .get(&(gold.to_string(), predicted.to_string()))
                    .copied()
                    .unwrap_or(0);
                let _ = write!(out, "  {count:>width$}");
            }
            out.push('\n');
        }
        out
    }
}

/// Exact accuracy of a prediction list against a gold list.
pub fn accuracy(predictions: &[String], gold: &[String]) -> Result<EvalReport, EvalError> {
    if predictions.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            gold: gold.len(),
        });
    }
    if predictions.is_empty() {
        return Err(EvalError::Empty);
    }
    let pairs: Vec<(&str, &str)> = gold
        .iter()
        .zip(predictions)
        .map(|(g, p)| (g.as_str(), p.as_str()))
        .collect();
    Ok(EvalReport::from_pairs(&pairs, 0.0, 0.0))
}

/// Classifies every pattern (which must carry gold categories) against the
/// base and reports accuracy, tie rate and unknown-value rate.
pub fn evaluate(base: &InstanceBase, patterns: &[Pattern]) -> Result<EvalReport, EvalError> {
    if patterns.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut pairs = Vec::with_capacity(patterns.len());
    let mut ties = 0;
    let mut unknown = 0;
    let mut predictions = Vec::with_capacity(patterns.len());
    for (index, pattern) in patterns.iter().enumerate() {
        let gold = pattern
            .category()
            .ok_or(EvalError::MissingGold { index })?;
        let got = base.classify(pattern)?;
        if got.tie_count > 1 {
            ties += 1;
        }
        if base.has_unseen_value(pattern) {
            unknown += 1;
        }
        predictions.push((gold, got.category));
    }
    for (gold, predicted) in &predictions {
        pairs.push((*gold, predicted.as_str()));
    }
    let total = patterns.len() as f64;
    Ok(EvalReport::from_pairs(
        &pairs,
        ties as f64 / total,
        unknown as f64 / total,
    ))
}

/// Report of one repeated-random-split cross-validation session.
#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    runs: Vec<f64>,
    mean: f64,
    stddev: f64,
    seed: u64,
}

impl CvReport {
    pub fn runs(&self) -> &[f64] {
        &self.runs
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample standard deviation (n - 1) of the run accuracies.
    pub fn stddev(&self) -> f64 {
        self.stddev
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, acc) in self.runs.iter().enumerate() {
            let _ = writeln!(out, "run {:>2}: {acc:.4}", i + 1);
        }
        let _ = writeln!(out, "mean:   {:.4}", self.mean);
        let _ = writeln!(out, "stddev: {:.4}", self.stddev);
        let _ = writeln!(out, "seed:   {}", self.seed);
        out
    }

    /// The report as a single JSON object.
    pub fn to_json(&self) -> String {
        let runs: Vec<String> = self.runs.iter().map(|a| format!("{a}")).collect();
        format!(
            "{{\"runs\":[{}],\"mean\":{},\"stddev\":{},\"seed\":{}}}",
            runs.join(","),
            self.mean,
            self.stddev,
            self.seed
        )
    }
}

/// Number of test instances for a dataset of `n`: a tenth, rounded half-up.
fn test_share(n: usize) -> usize {
    (n + 5) / 10
}

/// Indices in canonical order: sorted by (values, category), with the
/// original position as the final key so the order is total.
fn canonical_order(dataset: &Dataset) -> Vec<u32> {
    let mut order: Vec<u32> = (0..dataset.len() as u32).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (dataset.instance(a as usize), dataset.instance(b as usize));
        pa.values()
            .cmp(pb.values())
            .then_with(|| pa.category().cmp(&pb.category()))
            .then(a.cmp(&b))
    });
    order
}

/// One 90/10 split: shuffles the canonical order with the run generator and
/// takes the first tenth as test. With `stratified`, each category instead
/// contributes its own rounded tenth, taken in shuffled order.
fn draw_split(dataset: &Dataset, rng: &mut Rng, stratified: bool) -> (Vec<u32>, Vec<u32>) {
    let mut order = canonical_order(dataset);
    rng.shuffle(&mut order);
    if !stratified {
        let t = test_share(dataset.len());
        let test = order[..t].to_vec();
        let train = order[t..].to_vec();
        return (test, train);
    }
    let mut quota: BTreeMap<&str, usize> = BTreeMap::new();
    for (category, count) in dataset.category_counts() {
        quota.insert(category, test_share(count));
    }
    let mut test = Vec::new();
    let mut train = Vec::new();
    for i in order {
        let category = dataset.category(i as usize);
        let q = quota.get_mut(category).unwrap();
        if *q > 0 {
            *q -= 1;
            test.push(i);
        } else {
            train.push(i);
        }
    }
    (test, train)
}

/// Runs 10 independent 90/10 experiments with the given training
/// configuration. Each run r derives its own generator from `(seed, r)`,
/// so the runs execute in parallel and the report is still bit-identical
/// for a given seed.
pub fn cross_validate(
    dataset: &Dataset,
    config: &TrainConfig,
    seed: u64,
    stratified: bool,
) -> Result<CvReport, EvalError> {
    const RUNS: usize = 10;
    if dataset.len() < 10 {
        return Err(EvalError::TooSmall {
            size: dataset.len(),
        });
    }
    let kinds = dataset.schema().kinds();
    let names: Vec<Option<String>> = dataset
        .schema()
        .features()
        .iter()
        .map(|fi| fi.name().map(str::to_string))
        .collect();

    let run_one = |r: usize| -> Result<f64, EvalError> {
        let mut rng = Rng::new(run_seed(seed, r));
        let (test, train_idx) = draw_split(dataset, &mut rng, stratified);
        debug_assert_eq!(test.len() + train_idx.len(), dataset.len());
        let train_patterns: Vec<Pattern> = train_idx
            .iter()
            .map(|&i| dataset.instance(i as usize).clone())
            .collect();
        let train_set = Dataset::from_patterns(&kinds, Some(&names), train_patterns)
            .map_err(ModelError::from)?;
        let base = train(train_set, config)?;
        let test_patterns: Vec<Pattern> = test
            .iter()
            .map(|&i| dataset.instance(i as usize).clone())
            .collect();
        Ok(evaluate(&base, &test_patterns)?.accuracy())
    };

    let runs: Vec<f64> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..RUNS).map(|r| scope.spawn(move || run_one(r))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("cross-validation run panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mean = runs.iter().sum::<f64>() / runs.len() as f64;
    let variance = runs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (runs.len() - 1) as f64;
    Ok(CvReport {
        runs,
        mean,
        stddev: variance.sqrt(),
        seed,
    })
}
