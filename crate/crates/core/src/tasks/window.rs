//! Sliding-window encoders.
//!
//! One instance per sequence position: the features are the `left` items
//! before the target, the target itself, and the `right` items after it,
//! with out-of-range positions replaced by the pad symbol. All windows of a
//! configuration share the arity `left + 1 + right`; the target sits in the
//! middle.

use crate::data::{Dataset, FeatureKind, FeatureValue, Pattern};

use super::{SymbolSequence, TaskError};

/// Feature names `l<left>..l1, tgt, r1..r<right>`.
fn window_names(left: usize, right: usize) -> Vec<Option<String>> {
    let mut names = Vec::with_capacity(left + 1 + right);
    for i in (1..=left).rev() {
        names.push(Some(format!("l{i}")));
    }
    names.push(Some("tgt".to_string()));
    for i in 1..=right {
        names.push(Some(format!("r{i}")));
    }
    names
}

fn check_pad(seqs: &[&SymbolSequence], pad: &str) -> Result<(), TaskError> {
    for seq in seqs {
        if seq.items().iter().any(|item| item == pad) {
            return Err(TaskError::PadCollision {
                pad: pad.to_string(),
            });
        }
    }
    Ok(())
}

/// The window row centred on position `p`, as symbolic feature values.
fn window_values(items: &[String], p: usize, left: usize, right: usize, pad: &str) -> Vec<FeatureValue> {
    let mut values = Vec::with_capacity(left + 1 + right);
    let p = p as isize;
    for offset in -(left as isize)..=(right as isize) {
        let q = p + offset;
        let symbol = if q < 0 || q >= items.len() as isize {
            pad
        } else {
            items[q as usize].as_str()
        };
        values.push(FeatureValue::symbolic(symbol));
    }
    values
}

fn windows_of(
    seq: &SymbolSequence,
    left: usize,
    right: usize,
    pad: &str,
    category_of: impl Fn(&SymbolSequence, usize) -> String,
) -> Vec<Pattern> {
    (0..seq.len())
        .map(|p| Pattern::with_category(window_values(seq.items(), p, left, right, pad), category_of(seq, p)))
        .collect()
}

fn build(patterns: Vec<Pattern>, left: usize, right: usize) -> Result<Dataset, TaskError> {
    let kinds = vec![FeatureKind::Symbolic; left + 1 + right];
    let names = window_names(left, right);
    Ok(Dataset::from_patterns(&kinds, Some(&names), patterns)?)
}

/// Identification windows: the category of each instance is the tag of the
/// target item (e.g. its phoneme or part of speech).
pub fn window_identification(
    seq: &SymbolSequence,
    left: usize,
    right: usize,
    pad: &str,
) -> Result<Dataset, TaskError> {
    window_identification_all(std::slice::from_ref(seq), left, right, pad)
}

/// Identification windows over a whole set of sequences; windows never span
/// sequence boundaries.
pub fn window_identification_all(
    seqs: &[SymbolSequence],
    left: usize,
    right: usize,
    pad: &str,
) -> Result<Dataset, TaskError> {
    check_pad(&seqs.iter().collect::<Vec<_>>(), pad)?;
    if seqs.iter().any(|s| s.tags().is_none()) {
        return Err(TaskError::MissingTags);
    }
    let mut patterns = Vec::new();
    for seq in seqs {
        patterns.extend(windows_of(seq, left, right, pad, |s, p| {
            s.tags().unwrap()[p].clone()
        }));
    }
    build(patterns, left, right)
}

/// Segmentation windows: the category is `yes` when a boundary precedes the
/// target item, else `no`.
pub fn window_segmentation(
    seq: &SymbolSequence,
    left: usize,
    right: usize,
    pad: &str,
) -> Result<Dataset, TaskError> {
    window_segmentation_all(std::slice::from_ref(seq), left, right, pad)
}

pub fn window_segmentation_all(
    seqs: &[SymbolSequence],
    left: usize,
    right: usize,
    pad: &str,
) -> Result<Dataset, TaskError> {
    check_pad(&seqs.iter().collect::<Vec<_>>(), pad)?;
    if seqs.iter().any(|s| s.boundaries().is_none()) {
        return Err(TaskError::MissingBoundaries);
    }
    let mut patterns = Vec::new();
    for seq in seqs {
        patterns.extend(windows_of(seq, left, right, pad, |s, p| {
            if s.boundaries().unwrap()[p] { "yes" } else { "no" }.to_string()
        }));
    }
    build(patterns, left, right)
}

/// Inverse of the segmentation encoding: splits the items into the chunks
/// delimited by the per-position boundary flags.
pub fn split_at_boundaries(items: &[String], boundaries: &[bool]) -> Vec<Vec<String>> {
    assert_eq!(items.len(), boundaries.len(), "flag/item length mismatch");
    let mut chunks = Vec::new();
    let mut current = Vec::new();
    for (item, &boundary) in items.iter().zip(boundaries) {
        if boundary && !current.is_empty() {
            chunks.push(std::mem::take(&mut current));
        }
        current.push(item.clone());
    }
    if !current.is_empty() {
        chunks.push(current);
    }
    chunks
}
