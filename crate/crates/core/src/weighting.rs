//! Information-theoretic feature weighting.
//!
//! A training set is read as an information source emitting category labels;
//! the entropy of that source, and the average entropy that remains once a
//! feature's value is known, give each feature an information-gain weight in
//! bits. Gains are used raw: any uniform positive rescaling of the weight
//! vector leaves nearest-neighbour decisions unchanged, so no extra scaling
//! is applied (a sum-to-one view is available for reporting).
//!
//! Partitioning treats every distinct value as its own cell: each distinct
//! numeric value counts as one value (no binning), a tag set is one value
//! compared for exact equality, and missing forms a cell of its own.

use std::collections::BTreeMap;

use crate::data::{DataError, Dataset, FeatureValue};

/// Per-feature information-gain weights, in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    gains: Vec<f64>,
}

impl WeightVector {
    pub fn from_gains(gains: Vec<f64>) -> WeightVector {
        WeightVector { gains }
    }

    pub fn uniform(arity: usize) -> WeightVector {
        WeightVector {
            gains: vec![1.0; arity],
        }
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn gain(&self, f: usize) -> f64 {
        self.gains[f]
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    /// Sum-to-one view for reporting; all-zero vectors stay all-zero.
    pub fn normalized(&self) -> Vec<f64> {
        let sum: f64 = self.gains.iter().sum();
        if sum > 0.0 {
            self.gains.iter().map(|g| g / sum).collect()
        } else {
            vec![0.0; self.gains.len()]
        }
    }
}

/// Gains paired with feature names, in schema order.
#[derive(Debug, Clone, PartialEq)]
pub struct GainProfile {
    entries: Vec<(String, f64)>,
    database_entropy: f64,
}

impl GainProfile {
    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn database_entropy(&self) -> f64 {
        self.database_entropy
    }

    /// Text bar chart: one line per feature, bar length proportional to the
    /// gain, value printed to 4 decimals. With `normalize`, values are shown
    /// as shares summing to one.
    pub fn render(&self, normalize: bool) -> String {
        const BAR_WIDTH: f64 = 40.0;
        let values: Vec<f64> = if normalize {
            let sum: f64 = self.entries.iter().map(|(_, g)| g).sum();
            self.entries
                .iter()
                .map(|(_, g)| if sum > 0.0 { g / sum } else { 0.0 })
                .collect()
        } else {
            self.entries.iter().map(|(_, g)| *g).collect()
        };
        let max = values.iter().cloned().fold(0.0, f64::max);
        let name_width = self
            .entries
            .iter()
            .map(|(n, _)| n.chars().count())
            .max()
            .unwrap_or(0);
        let mut out = format!("database entropy: {:.4} bits\n", self.database_entropy);
        for ((name, _), value) in self.entries.iter().zip(&values) {
            let bar_len = if max > 0.0 {
                (value / max * BAR_WIDTH).round() as usize
            } else {
                0
            };
            out.push_str(&format!(
                "{name:<name_width$}  {value:.4} |{}\n",
                "#".repeat(bar_len)
            ));
        }
        out
    }
}

/// Category counts per distinct value of feature `f`, with counts aligned to
/// the sorted category inventory. Deterministic iteration order keeps all
/// floating-point sums reproducible.
fn value_category_counts(dataset: &Dataset, f: usize) -> BTreeMap<&FeatureValue, Vec<usize>> {
    let index: BTreeMap<&str, usize> = dataset
        .categories()
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let mut table: BTreeMap<&FeatureValue, Vec<usize>> = BTreeMap::new();
    for inst in dataset.instances() {
        let counts = table
            .entry(inst.value(f))
            .or_insert_with(|| vec![0; index.len()]);
        counts[index[inst.category().unwrap()]] += 1;
    }
    table
}

fn entropy_of_counts(counts: &[usize], total: usize) -> f64 {
    let total = total as f64;
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / total;
            h -= p * p.log2();
        }
    }
    h
}

/// Entropy of the category distribution, in bits.
pub fn database_entropy(dataset: &Dataset) -> Result<f64, DataError> {
    if dataset.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    let counts: Vec<usize> = dataset.category_counts().values().cloned().collect();
    Ok(entropy_of_counts(&counts, dataset.len()))
}

/// Average category entropy once the value of feature `f` is known:
/// the entropy of each value's sub-dataset, weighted by its relative size.
pub fn feature_average_entropy(dataset: &Dataset, f: usize) -> Result<f64, DataError> {
    if dataset.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    assert!(f < dataset.arity(), "feature index {f} out of range");
    let total = dataset.len() as f64;
    let mut h = 0.0;
    for counts in value_category_counts(dataset, f).values() {
        let size: usize = counts.iter().sum();
        h += entropy_of_counts(counts, size) * (size as f64 / total);
    }
    Ok(h)
}

/// Entropy reduction achieved by knowing feature `f`, in bits.
pub fn information_gain(dataset: &Dataset, f: usize) -> Result<f64, DataError> {
    let gain = database_entropy(dataset)? - feature_average_entropy(dataset, f)?;
    // Round-off can push a mathematically nonnegative gain a hair below zero.
    if gain < 0.0 && gain > -1e-12 {
        return Ok(0.0);
    }
    Ok(gain)
}

/// Information gain of every feature, usable directly as distance weights.
pub fn ig_weights(dataset: &Dataset) -> Result<WeightVector, DataError> {
    let gains = (0..dataset.arity())
        .map(|f| information_gain(dataset, f))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(WeightVector::from_gains(gains))
}

/// Gains paired with display names, in schema order.
pub fn gain_profile(dataset: &Dataset) -> Result<GainProfile, DataError> {
    let weights = ig_weights(dataset)?;
    let entries = weights
        .gains()
        .iter()
        .enumerate()
        .map(|(f, &g)| (dataset.schema().display_name(f), g))
        .collect();
    Ok(GainProfile {
        entries,
        database_entropy: database_entropy(dataset)?,
    })
}
