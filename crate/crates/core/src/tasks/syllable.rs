//! Syllable-structure encoding.
//!
//! A word is encoded by four features per syllable slot — stress, onset,
//! nucleus, coda — for its last `n_syl` syllables, earliest slot first.
//! Words with fewer syllables leave the leading slots missing; a
//! phonologically empty onset or coda is the empty-string symbol, which is
//! distinct from missing. Typical uses encode the last two syllables
//! (suffix prediction) or the last three (stress assignment).

use crate::data::{Dataset, FeatureKind, FeatureValue, Pattern};

use super::TaskError;

/// Stress feature value of a stressed syllable.
pub const STRESSED: &str = "+";
/// Stress feature value of an unstressed syllable.
pub const UNSTRESSED: &str = "-";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Syllable {
    onset: String,
    nucleus: String,
    coda: String,
    stressed: bool,
}

impl Syllable {
    pub fn new(
        onset: impl Into<String>,
        nucleus: impl Into<String>,
        coda: impl Into<String>,
        stressed: bool,
    ) -> Result<Syllable, TaskError> {
        let nucleus = nucleus.into();
        if nucleus.is_empty() {
            return Err(TaskError::EmptyNucleus);
        }
        Ok(Syllable {
            onset: onset.into(),
            nucleus,
            coda: coda.into(),
            stressed,
        })
    }

    pub fn onset(&self) -> &str {
        &self.onset
    }

    pub fn nucleus(&self) -> &str {
        &self.nucleus
    }

    pub fn coda(&self) -> &str {
        &self.coda
    }

    pub fn stressed(&self) -> bool {
        self.stressed
    }
}

/// A syllabified word together with its task label (e.g. a suffix form or a
/// stress position).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyllabifiedWord {
    syllables: Vec<Syllable>,
    label: String,
}

impl SyllabifiedWord {
    pub fn new(syllables: Vec<Syllable>, label: impl Into<String>) -> Result<SyllabifiedWord, TaskError> {
        if syllables.is_empty() {
            return Err(TaskError::NoSyllables);
        }
        Ok(SyllabifiedWord {
            syllables,
            label: label.into(),
        })
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Encodes the last `n_syl` syllables as `4 * n_syl` features (str, ons,
/// nuc, cod per slot, earliest slot first); absent syllables contribute
/// four missing values. The word label becomes the category.
pub fn encode_syllable_word(word: &SyllabifiedWord, n_syl: usize) -> Pattern {
    assert!(n_syl >= 1, "n_syl must be at least 1");
    let mut values = Vec::with_capacity(4 * n_syl);
    let count = word.syllables.len();
    for slot in 0..n_syl {
        // Right-align: the last slot is the final syllable.
        let index = (count + slot).checked_sub(n_syl);
        match index.and_then(|i| word.syllables.get(i)) {
            None => values.extend([
                FeatureValue::Missing,
                FeatureValue::Missing,
                FeatureValue::Missing,
                FeatureValue::Missing,
            ]),
            Some(syl) => values.extend([
                FeatureValue::symbolic(if syl.stressed { STRESSED } else { UNSTRESSED }),
                FeatureValue::symbolic(&syl.onset),
                FeatureValue::symbolic(&syl.nucleus),
                FeatureValue::symbolic(&syl.coda),
            ]),
        }
    }
    Pattern::with_category(values, word.label.clone())
}

/// Slot-structured feature names: `str1, ons1, nuc1, cod1, str2, ...`.
fn slot_names(n_syl: usize) -> Vec<Option<String>> {
    let mut names = Vec::with_capacity(4 * n_syl);
    for slot in 1..=n_syl {
        for part in ["str", "ons", "nuc", "cod"] {
            names.push(Some(format!("{part}{slot}")));
        }
    }
    names
}

/// Builds a dataset from encoded words; all features are symbolic.
pub fn syllable_dataset(words: &[SyllabifiedWord], n_syl: usize) -> Result<Dataset, TaskError> {
    let patterns = words.iter().map(|w| encode_syllable_word(w, n_syl)).collect();
    let kinds = vec![FeatureKind::Symbolic; 4 * n_syl];
    Ok(Dataset::from_patterns(&kinds, Some(&slot_names(n_syl)), patterns)?)
}
