//! The part-of-speech tagging pipeline.
//!
//! From a tagged corpus a lexicon maps every word to its ambiguous
//! category: the set of tags it actually exhibits, with per-tag counts.
//! The corpus is then retagged with these ambiguous categories and windowed
//! into a tagging dataset whose features are tag sets — so the classifier's
//! graded tag-set distance can tell "more or less equal" ambiguity apart —
//! and whose category is the gold tag. At tagging time, unambiguous known
//! words keep their lexicon tag directly (the classifier could only confirm
//! it); ambiguous and unknown words are classified from their windows,
//! greedily left to right.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::classifier::InstanceBase;
use crate::data::{Dataset, FeatureKind, FeatureValue, Pattern, TagSet};

use super::{TaggedCorpus, TaskError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    tags: TagSet,
    counts: BTreeMap<String, u64>,
}

impl LexiconEntry {
    /// The ambiguous category: exactly the tags observed for the word.
    pub fn tags(&self) -> &TagSet {
        &self.tags
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn count(&self, tag: &str) -> u64 {
        self.counts.get(tag).copied().unwrap_or(0)
    }
}

/// Word → ambiguous category map derived from a tagged corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<String, LexiconEntry>,
}

impl Lexicon {
    pub fn from_counts(counts: BTreeMap<String, BTreeMap<String, u64>>) -> Result<Lexicon, TaskError> {
        let entries = counts
            .into_iter()
            .map(|(word, counts)| {
                let tags = TagSet::new(counts.keys().cloned())?;
                Ok((word, LexiconEntry { tags, counts }))
            })
            .collect::<Result<_, TaskError>>()?;
        Ok(Lexicon { entries })
    }

    pub fn get(&self, word: &str) -> Option<&LexiconEntry> {
        self.entries.get(word)
    }

    pub fn entries(&self) -> &BTreeMap<String, LexiconEntry> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The inventory of distinct ambiguous categories.
    pub fn ambiguous_categories(&self) -> BTreeSet<TagSet> {
        self.entries.values().map(|e| e.tags.clone()).collect()
    }

    /// Union of every tag in the lexicon; the default fallback category for
    /// unknown words.
    pub fn all_tags(&self) -> Result<TagSet, TaskError> {
        let tags: BTreeSet<&String> = self
            .entries
            .values()
            .flat_map(|e| e.tags.tags().iter())
            .collect();
        Ok(TagSet::new(tags.into_iter().cloned())?)
    }
}

/// Tallies, for each word, how many times it was associated with which tags.
pub fn derive_lexicon(corpus: &TaggedCorpus) -> Result<Lexicon, TaskError> {
    if corpus.token_count() == 0 {
        return Err(TaskError::EmptyCorpus);
    }
    let mut counts: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    for sentence in corpus.sentences() {
        let tags = sentence.tags().expect("tagged corpus invariant");
        for (word, tag) in sentence.items().iter().zip(tags) {
            *counts
                .entry(word.clone())
                .or_default()
                .entry(tag.clone())
                .or_insert(0) += 1;
        }
    }
    Lexicon::from_counts(counts)
}

/// A sentence with each token replaced by its ambiguous category; the gold
/// tags ride along as downstream instance categories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetaggedSentence {
    pub ambiguities: Vec<TagSet>,
    pub gold: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetagOutcome {
    pub sentences: Vec<RetaggedSentence>,
    /// Tokens not covered by the lexicon, replaced by the fallback category.
    pub unknown_tokens: usize,
}

/// Replaces every token of the corpus by its lexicon ambiguous category,
/// substituting `fallback` (and counting) for words the lexicon misses.
pub fn retag_corpus(corpus: &TaggedCorpus, lexicon: &Lexicon, fallback: &TagSet) -> RetagOutcome {
    let mut unknown_tokens = 0;
    let sentences = corpus
        .sentences()
        .iter()
        .map(|sentence| {
            let (ambiguities, unknown) = lookup_all(sentence.items(), lexicon, fallback);
            unknown_tokens += unknown;
            RetaggedSentence {
                ambiguities,
                gold: sentence.tags().expect("tagged corpus invariant").to_vec(),
            }
        })
        .collect();
    RetagOutcome {
        sentences,
        unknown_tokens,
    }
}

/// Ambiguous categories for a plain word sequence (tagging time).
pub fn retag_words(words: &[String], lexicon: &Lexicon, fallback: &TagSet) -> (Vec<TagSet>, usize) {
    lookup_all(words, lexicon, fallback)
}

fn lookup_all(words: &[String], lexicon: &Lexicon, fallback: &TagSet) -> (Vec<TagSet>, usize) {
    let mut unknown = 0;
    let tags = words
        .iter()
        .map(|w| match lexicon.get(w) {
            Some(entry) => entry.tags().clone(),
            None => {
                unknown += 1;
                fallback.clone()
            }
        })
        .collect();
    (tags, unknown)
}

/// Window feature names shared with the plain windowing encoders.
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

fn window_row(ambiguities: &[TagSet], p: usize, left: usize, right: usize, pad: &TagSet) -> Vec<FeatureValue> {
    let mut values = Vec::with_capacity(left + 1 + right);
    let p = p as isize;
    for offset in -(left as isize)..=(right as isize) {
        let q = p + offset;
        let set = if q < 0 || q >= ambiguities.len() as isize {
            pad
        } else {
            &ambiguities[q as usize]
        };
        values.push(FeatureValue::TagSet(set.clone()));
    }
    values
}

/// Builds the tagging dataset: one instance per token, features are the
/// windowed ambiguous categories (tag-set kind), the category is the gold
/// tag. Windows never span sentences; sentence edges are padded with the
/// singleton `{pad_tag}` set.
pub fn build_tagging_dataset(
    sentences: &[RetaggedSentence],
    left: usize,
    right: usize,
    pad_tag: &str,
) -> Result<Dataset, TaskError> {
    let pad = TagSet::singleton(pad_tag);
    for s in sentences {
        if s.ambiguities.contains(&pad) {
            return Err(TaskError::PadCollision {
                pad: pad_tag.to_string(),
            });
        }
    }
    let mut patterns = Vec::new();
    for s in sentences {
        debug_assert_eq!(s.ambiguities.len(), s.gold.len());
        for p in 0..s.ambiguities.len() {
            patterns.push(Pattern::with_category(
                window_row(&s.ambiguities, p, left, right, &pad),
                s.gold[p].clone(),
            ));
        }
    }
    let kinds = vec![FeatureKind::TagSet; left + 1 + right];
    Ok(Dataset::from_patterns(&kinds, Some(&window_names(left, right)), patterns)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggerConfig {
    pub left: usize,
    pub right: usize,
    /// Pad tag for sentence edges; must not occur as a singleton ambiguous
    /// category in the data.
    pub pad: String,
    /// Ambiguous category assumed for words the lexicon misses (typically
    /// the union of the open-class tags).
    pub fallback: TagSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagOutcome {
    pub tags: Vec<String>,
    pub unknown_words: usize,
}

/// Tags one sentence with the full pipeline: lexicon lookup (fallback for
/// unknowns), windowing, and one classification per position. Words whose
/// ambiguous category is a singleton bypass the classifier.
pub fn tag(
    words: &[String],
    lexicon: &Lexicon,
    base: &InstanceBase,
    config: &TaggerConfig,
) -> Result<TagOutcome, TaskError> {
    if words.is_empty() {
        return Ok(TagOutcome {
            tags: Vec::new(),
            unknown_words: 0,
        });
    }
    let arity = config.left + 1 + config.right;
    if base.arity() != arity {
        return Err(TaskError::Model(
            crate::classifier::ModelError::ArityMismatch {
                expected: base.arity(),
                found: arity,
            },
        ));
    }
    let pad = TagSet::singleton(&config.pad);
    let (ambiguities, unknown_words) = retag_words(words, lexicon, &config.fallback);
    if ambiguities.contains(&pad) {
        return Err(TaskError::PadCollision {
            pad: config.pad.clone(),
        });
    }
    let mut tags = Vec::with_capacity(words.len());
    for p in 0..words.len() {
        if let Some(tag) = ambiguities[p].as_singleton() {
            tags.push(tag.to_string());
            continue;
        }
        let pattern = Pattern::new(window_row(&ambiguities, p, config.left, config.right, &pad));
        let got = base.classify(&pattern)?;
        tags.push(got.category);
    }
    Ok(TagOutcome {
        tags,
        unknown_words,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{train, MetricSpec, TrainConfig, Weighting};
    use crate::tasks::SymbolSequence;

    fn sentence(pairs: &[(&str, &str)]) -> SymbolSequence {
        SymbolSequence::new(pairs.iter().map(|(w, _)| *w))
            .with_tags(pairs.iter().map(|(_, t)| *t))
            .unwrap()
    }

    fn toy_corpus() -> TaggedCorpus {
        TaggedCorpus::new(vec![
            sentence(&[("the", "det"), ("man", "noun"), ("walks", "verb")]),
            sentence(&[("the", "det"), ("man", "noun"), ("sleeps", "verb")]),
            sentence(&[("men", "noun"), ("man", "verb"), ("boats", "noun")]),
            sentence(&[("the", "det"), ("man", "noun")]),
        ])
        .unwrap()
    }

    #[test]
    fn lexicon_counts_tag_occurrences_per_word() {
        let lex = derive_lexicon(&toy_corpus()).unwrap();
        let man = lex.get("man").unwrap();
        assert_eq!(man.tags(), &TagSet::new(["noun", "verb"]).unwrap());
        assert_eq!(man.count("noun"), 3);
        assert_eq!(man.count("verb"), 1);
        let the = lex.get("the").unwrap();
        assert_eq!(the.tags().as_singleton(), Some("det"));
        assert!(lex.get("zebra").is_none());
    }

    #[test]
    fn lexicon_counts_conserve_the_token_count() {
        let corpus = toy_corpus();
        let lex = derive_lexicon(&corpus).unwrap();
        let total: u64 = lex
            .entries()
            .values()
            .flat_map(|e| e.counts().values())
            .sum();
        assert_eq!(total as usize, corpus.token_count());
    }

    #[test]
    fn ambiguous_category_inventory_is_the_set_of_distinct_tag_sets() {
        let lex = derive_lexicon(&toy_corpus()).unwrap();
        let inventory = lex.ambiguous_categories();
        assert!(inventory.contains(&TagSet::new(["noun", "verb"]).unwrap()));
        assert!(inventory.contains(&TagSet::singleton("det")));
        // {det}, {noun}, {verb}, {noun,verb}
        assert_eq!(inventory.len(), 4);
        assert_eq!(
            lex.all_tags().unwrap(),
            TagSet::new(["det", "noun", "verb"]).unwrap()
        );
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let corpus = TaggedCorpus::new(vec![]).unwrap();
        assert!(matches!(
            derive_lexicon(&corpus),
            Err(TaskError::EmptyCorpus)
        ));
    }

    #[test]
    fn retagging_with_own_lexicon_covers_every_token() {
        let corpus = toy_corpus();
        let lex = derive_lexicon(&corpus).unwrap();
        let fallback = lex.all_tags().unwrap();
        let out = retag_corpus(&corpus, &lex, &fallback);
        assert_eq!(out.unknown_tokens, 0);
        assert_eq!(out.sentences.len(), corpus.sentences().len());
        assert_eq!(
            out.sentences[0].ambiguities[1],
            TagSet::new(["noun", "verb"]).unwrap()
        );
        assert_eq!(out.sentences[0].gold[1], "noun");
    }

    #[test]
    fn unknown_words_take_the_fallback_and_are_counted() {
        let lex = derive_lexicon(&toy_corpus()).unwrap();
        let fallback = TagSet::new(["noun", "verb"]).unwrap();
        let words = vec!["the".to_string(), "zebra".to_string()];
        let (sets, unknown) = retag_words(&words, &lex, &fallback);
        assert_eq!(unknown, 1);
        assert_eq!(sets[1], fallback);
    }

    #[test]
    fn lexicon_derivation_is_idempotent_over_restored_corpora() {
        // Retag, then restore word/gold pairs: deriving again is identical.
        let corpus = toy_corpus();
        let lex = derive_lexicon(&corpus).unwrap();
        let fallback = lex.all_tags().unwrap();
        let out = retag_corpus(&corpus, &lex, &fallback);
        let restored = TaggedCorpus::new(
            corpus
                .sentences()
                .iter()
                .zip(&out.sentences)
                .map(|(s, r)| {
                    SymbolSequence::new(s.items().iter().cloned())
                        .with_tags(r.gold.iter().cloned())
                        .unwrap()
                })
                .collect(),
        )
        .unwrap();
        assert_eq!(derive_lexicon(&restored).unwrap(), lex);
    }

    #[test]
    fn tagging_dataset_windows_are_tag_set_kind() {
        let corpus = toy_corpus();
        let lex = derive_lexicon(&corpus).unwrap();
        let fallback = lex.all_tags().unwrap();
        let out = retag_corpus(&corpus, &lex, &fallback);
        let d = build_tagging_dataset(&out.sentences, 1, 1, "<pad>").unwrap();
        assert_eq!(d.len(), corpus.token_count());
        assert_eq!(d.arity(), 3);
        assert!(d.schema().kinds().iter().all(|&k| k == FeatureKind::TagSet));
        // First window of the first sentence: pad, {det}, {noun,verb}.
        assert_eq!(
            d.instance(0).value(0),
            &FeatureValue::TagSet(TagSet::singleton("<pad>"))
        );
        assert_eq!(d.category(0), "det");
    }

    #[test]
    fn pad_collision_in_tagging_data_is_rejected() {
        let corpus = toy_corpus();
        let lex = derive_lexicon(&corpus).unwrap();
        let fallback = lex.all_tags().unwrap();
        let out = retag_corpus(&corpus, &lex, &fallback);
        assert!(matches!(
            build_tagging_dataset(&out.sentences, 1, 1, "det"),
            Err(TaskError::PadCollision { .. })
        ));
    }

    #[test]
    fn self_application_beats_the_majority_tag_baseline() {
        let corpus = toy_corpus();
        let lex = derive_lexicon(&corpus).unwrap();
        let fallback = lex.all_tags().unwrap();
        let out = retag_corpus(&corpus, &lex, &fallback);
        let d = build_tagging_dataset(&out.sentences, 1, 1, "<pad>").unwrap();
        let base = train(d.clone(), &TrainConfig::default()).unwrap();
        let report = crate::eval::evaluate(&base, d.instances()).unwrap();

        // Majority baseline: always guess the corpus's most frequent tag.
        let mut tag_counts: std::collections::BTreeMap<&str, usize> =
            std::collections::BTreeMap::new();
        for i in 0..d.len() {
            *tag_counts.entry(d.category(i)).or_insert(0) += 1;
        }
        let majority = *tag_counts.values().max().unwrap() as f64 / d.len() as f64;
        assert!(report.accuracy() >= majority);
    }

    fn trained_pipeline() -> (Lexicon, InstanceBase, TaggerConfig) {
        let corpus = toy_corpus();
        let lex = derive_lexicon(&corpus).unwrap();
        let fallback = lex.all_tags().unwrap();
        let out = retag_corpus(&corpus, &lex, &fallback);
        let d = build_tagging_dataset(&out.sentences, 1, 1, "<pad>").unwrap();
        let base = train(
            d,
            &TrainConfig {
                weighting: Weighting::InformationGain,
                metrics: MetricSpec::Default,
                k: 1,
            },
        )
        .unwrap();
        let config = TaggerConfig {
            left: 1,
            right: 1,
            pad: "<pad>".to_string(),
            fallback,
        };
        (lex, base, config)
    }

    #[test]
    fn unambiguous_words_bypass_the_classifier() {
        let (lex, base, config) = trained_pipeline();
        let words: Vec<String> = ["the", "men"].iter().map(|s| s.to_string()).collect();
        let out = tag(&words, &lex, &base, &config).unwrap();
        assert_eq!(out.tags, ["det", "noun"]);
        assert_eq!(out.unknown_words, 0);
    }

    #[test]
    fn empty_sentence_tags_to_empty_output() {
        let (lex, base, config) = trained_pipeline();
        let out = tag(&[], &lex, &base, &config).unwrap();
        assert!(out.tags.is_empty());
    }

    #[test]
    fn ambiguous_words_are_disambiguated_in_context() {
        let (lex, base, config) = trained_pipeline();
        let words: Vec<String> = ["the", "man", "walks"].iter().map(|s| s.to_string()).collect();
        let out = tag(&words, &lex, &base, &config).unwrap();
        assert_eq!(out.tags, ["det", "noun", "verb"]);
        // "man" after "men" (noun context) was a verb in training.
        let words: Vec<String> = ["men", "man", "boats"].iter().map(|s| s.to_string()).collect();
        let out = tag(&words, &lex, &base, &config).unwrap();
        assert_eq!(out.tags[1], "verb");
    }

    #[test]
    fn window_geometry_must_match_the_trained_base() {
        let (lex, base, mut config) = trained_pipeline();
        config.left = 2;
        let words = vec!["the".to_string(), "man".to_string()];
        assert!(matches!(
            tag(&words, &lex, &base, &config),
            Err(TaskError::Model(_))
        ));
    }

    #[test]
    fn emitted_tags_stay_inside_the_training_inventory() {
        let (lex, base, config) = trained_pipeline();
        let inventory = lex.all_tags().unwrap();
        let words: Vec<String> = ["zebra", "man", "unseen", "walks"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let out = tag(&words, &lex, &base, &config).unwrap();
        assert_eq!(out.unknown_words, 2);
        assert!(out.tags.iter().all(|t| inventory.contains(t)));
    }
}
