//! Per-feature distance components.
//!
//! All deltas are symmetric, lie in a bounded nonnegative range, and share
//! one missing-value rule: missing matches missing at distance 0 and
//! mismatches everything else at distance 1, under every metric.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::data::{Dataset, FeatureValue};

/// Scaled numeric distance `|x - y| / (max - min)`, clamped to `[0, 1]` so
/// query values outside the frozen training bounds cannot dominate. A
/// degenerate range (`max == min`) falls back to exact-match comparison.
pub fn delta_numeric(x: f64, y: f64, min: f64, max: f64) -> f64 {
    debug_assert!(min <= max, "inverted numeric bounds");
    if max == min {
        return if x == y { 0.0 } else { 1.0 };
    }
    ((x - y).abs() / (max - min)).min(1.0)
}

/// Overlap distance: 0 iff the values are equal, else 1. Missing equals
/// missing and nothing else.
pub fn delta_overlap(x: &FeatureValue, y: &FeatureValue) -> f64 {
    if x == y {
        0.0
    } else {
        1.0
    }
}

/// Jaccard dissimilarity `1 - |x ∩ y| / |x ∪ y|` between tag sets. A plain
/// symbolic value is promoted to a singleton set; values that cannot be read
/// as tag sets fall back to overlap.
pub fn delta_tagset(x: &FeatureValue, y: &FeatureValue) -> f64 {
    match (x.is_missing(), y.is_missing()) {
        (true, true) => return 0.0,
        (true, false) | (false, true) => return 1.0,
        _ => {}
    }
    match (as_tag_slice(x), as_tag_slice(y)) {
        (Some(a), Some(b)) => jaccard_distance(a, b),
        _ => delta_overlap(x, y),
    }
}

fn as_tag_slice(v: &FeatureValue) -> Option<&[String]> {
    match v {
        FeatureValue::TagSet(t) => Some(t.tags()),
        FeatureValue::Symbolic(s) => Some(std::slice::from_ref(s)),
        _ => None,
    }
}

/// Jaccard dissimilarity of two sorted, duplicate-free tag slices.
fn jaccard_distance(a: &[String], b: &[String]) -> f64 {
    let (mut i, mut j, mut both) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                both += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - both;
    1.0 - both as f64 / union as f64
}

/// Per-value category-count table backing the value-difference metric for
/// one feature: two values are close when their conditional category
/// distributions are close in L1. The symmetric form
/// `Σ_c |P(c|v1) - P(c|v2)|` is used, with probabilities estimated as raw
/// relative frequencies (no smoothing).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VdmTable {
    entries: BTreeMap<FeatureValue, VdmEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VdmEntry {
    counts: Vec<u64>,
    total: u64,
}

impl VdmEntry {
    pub fn new(counts: Vec<u64>) -> VdmEntry {
        let total = counts.iter().sum();
        VdmEntry { counts, total }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

impl VdmTable {
    /// Tallies the per-category occurrence counts of every value of feature
    /// `f`, with count vectors aligned to `categories` (sorted inventory).
    pub fn build(dataset: &Dataset, f: usize, categories: &[String]) -> VdmTable {
        let index: BTreeMap<&str, usize> = categories
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i))
            .collect();
        let mut entries: BTreeMap<FeatureValue, VdmEntry> = BTreeMap::new();
        for inst in dataset.instances() {
            let entry = entries
                .entry(inst.value(f).clone())
                .or_insert_with(|| VdmEntry {
                    counts: vec![0; categories.len()],
                    total: 0,
                });
            entry.counts[index[inst.category().unwrap()]] += 1;
            entry.total += 1;
        }
        VdmTable { entries }
    }

    pub fn from_entries(entries: BTreeMap<FeatureValue, VdmEntry>) -> VdmTable {
        VdmTable { entries }
    }

    pub fn entries(&self) -> &BTreeMap<FeatureValue, VdmEntry> {
        &self.entries
    }

    pub fn contains(&self, v: &FeatureValue) -> bool {
        self.entries.contains_key(v)
    }

    /// L1 distance between the conditional category distributions of two
    /// training values; `None` if either value was not seen in training.
    pub fn delta(&self, v1: &FeatureValue, v2: &FeatureValue) -> Option<f64> {
        let a = self.entries.get(v1)?;
        let b = self.entries.get(v2)?;
        let (ta, tb) = (a.total as f64, b.total as f64);
        let mut d = 0.0;
        for (&ca, &cb) in a.counts.iter().zip(&b.counts) {
            d += (ca as f64 / ta - cb as f64 / tb).abs();
        }
        Some(d)
    }
}
