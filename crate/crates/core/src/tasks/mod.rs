//! Encoders that reduce sequence tasks to fixed-width classification.
//!
//! A window slid one item at a time over a sequence turns every position
//! into one instance: the target item plus a fixed left and right context,
//! with out-of-range positions padded. Identification tasks predict a label
//! for the target (phoneme, tag); segmentation tasks predict whether a
//! boundary precedes it. Syllable-structure encoding and the
//! lexicon-driven tagging pipeline build on the same reduction.

mod syllable;
mod tagging;
mod window;

pub mod seqio;

pub use syllable::{encode_syllable_word, syllable_dataset, Syllable, SyllabifiedWord, STRESSED, UNSTRESSED};
pub use tagging::{
    build_tagging_dataset, derive_lexicon, retag_corpus, retag_words, tag, Lexicon, LexiconEntry,
    RetagOutcome, RetaggedSentence, TagOutcome, TaggerConfig,
};
pub use window::{
    split_at_boundaries, window_identification, window_identification_all, window_segmentation,
    window_segmentation_all,
};

use thiserror::Error;

use crate::classifier::ModelError;
use crate::data::DataError;

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("pad symbol {pad:?} occurs in the data")]
    PadCollision { pad: String },
    #[error("sequence items are not annotated with categories")]
    MissingTags,
    #[error("sequence items carry no boundary flags")]
    MissingBoundaries,
    #[error("annotation length {annotations} does not match item count {items}")]
    AnnotationLength { items: usize, annotations: usize },
    #[error("corpus contains no tokens")]
    EmptyCorpus,
    #[error("syllable nucleus must not be empty")]
    EmptyNucleus,
    #[error("a word must have at least one syllable")]
    NoSyllables,
    #[error("line {line}: {detail}")]
    BadLine { line: usize, detail: String },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A sequence of symbolic items (letters, phonemes or words) with optional
/// per-position annotations: a category per item and/or a flag marking that
/// a boundary precedes the item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSequence {
    items: Vec<String>,
    tags: Option<Vec<String>>,
    boundaries: Option<Vec<bool>>,
}

impl SymbolSequence {
    pub fn new<I, S>(items: I) -> SymbolSequence
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        SymbolSequence {
            items: items.into_iter().map(Into::into).collect(),
            tags: None,
            boundaries: None,
        }
    }

    pub fn with_tags<I, S>(mut self, tags: I) -> Result<SymbolSequence, TaskError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tags: Vec<String> = tags.into_iter().map(Into::into).collect();
        if tags.len() != self.items.len() {
            return Err(TaskError::AnnotationLength {
                items: self.items.len(),
                annotations: tags.len(),
            });
        }
        self.tags = Some(tags);
        Ok(self)
    }

    /// Boundary flags, one per position: true when a boundary precedes the
    /// item at that position.
    pub fn with_boundaries(mut self, boundaries: Vec<bool>) -> Result<SymbolSequence, TaskError> {
        if boundaries.len() != self.items.len() {
            return Err(TaskError::AnnotationLength {
                items: self.items.len(),
                annotations: boundaries.len(),
            });
        }
        self.boundaries = Some(boundaries);
        Ok(self)
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn tags(&self) -> Option<&[String]> {
        self.tags.as_deref()
    }

    pub fn boundaries(&self) -> Option<&[bool]> {
        self.boundaries.as_deref()
    }
}

/// Sentences in which every token carries exactly one gold tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedCorpus {
    sentences: Vec<SymbolSequence>,
}

impl TaggedCorpus {
    pub fn new(sentences: Vec<SymbolSequence>) -> Result<TaggedCorpus, TaskError> {
        if sentences.iter().any(|s| s.tags().is_none()) {
            return Err(TaskError::MissingTags);
        }
        Ok(TaggedCorpus { sentences })
    }

    pub fn sentences(&self) -> &[SymbolSequence] {
        &self.sentences
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.len()).sum()
    }
}
