//! Memory-based learning for linguistic classification tasks.
//!
//! Training stores examples verbatim in an instance base; classification
//! retrieves the least distant stored instance under a per-feature distance
//! (overlap, scaled numeric, value-difference or tag-set Jaccard), with
//! features weighted by the information gain they contribute to predicting
//! the category. Sequence tasks — syllable-boundary prediction,
//! grapheme-to-phoneme conversion, stress assignment, part-of-speech
//! tagging — reduce to fixed-width classification through windowing
//! encoders, so one classifier serves them all.
//!
//! ```
//! use mbl::{parse_dataset, train, FeatureValue, Pattern, TrainConfig};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let data = parse_dataset("a,b,yes\na,c,no\nd,b,yes\nd,c,no\n", None)?;
//! let base = train(data, &TrainConfig::default())?;
//!
//! let query = Pattern::new(vec![
//!     FeatureValue::symbolic("a"),
//!     FeatureValue::symbolic("b"),
//! ]);
//! let got = base.classify(&query)?;
//! assert_eq!(got.category, "yes");
//! assert_eq!(got.distance, 0.0);
//! # Ok(())
//! # }
//! ```

pub mod classifier;
pub mod cli;
pub mod data;
pub mod eval;
pub mod rng;
pub mod tasks;
pub mod weighting;

pub use classifier::{
    delta_numeric, delta_overlap, delta_tagset, train, Classification, InstanceBase, MetricChoice,
    MetricSpec, ModelError, TrainConfig, VdmTable, Weighting,
};
pub use data::{
    parse_dataset, parse_kinds, serialize_dataset, DataError, Dataset, FeatureKind, FeatureSchema,
    FeatureValue, Pattern, TagSet,
};
pub use eval::{accuracy, cross_validate, evaluate, CvReport, EvalError, EvalReport};
pub use tasks::{
    build_tagging_dataset, derive_lexicon, encode_syllable_word, retag_corpus, syllable_dataset,
    tag, window_identification, window_segmentation, Lexicon, Syllable, SyllabifiedWord,
    SymbolSequence, TagOutcome, TaggedCorpus, TaggerConfig, TaskError,
};
pub use weighting::{
    database_entropy, feature_average_entropy, gain_profile, ig_weights, information_gain,
    GainProfile, WeightVector,
};
