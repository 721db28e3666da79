//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `cargo test --test acceptance -- --nocapture`).

mod common;

use std::collections::BTreeSet;
use std::io::Cursor;
use std::time::{Duration, Instant};

use common::*;
use mbl::data::{parse_dataset, serialize_dataset, FeatureValue, Pattern};
use mbl::eval::{cross_validate, evaluate};
use mbl::rng::Rng;
use mbl::tasks::{
    build_tagging_dataset, derive_lexicon, retag_corpus, syllable_dataset, tag, Syllable,
    SyllabifiedWord, SymbolSequence, TaggerConfig,
};
use mbl::weighting::{database_entropy, feature_average_entropy, ig_weights, information_gain};
use mbl::{
    train, InstanceBase, MetricChoice, MetricSpec, TrainConfig, WeightVector, Weighting,
};

// -------------------------------------------------------------------------
// 1. Entropy / information-gain oracle suite

#[test]
fn criterion_1_entropy_oracle_suite() {
    criterion(1, "entropy and gain match brute force", || {
        let start = Instant::now();
        let mut rng = Rng::new(0xACCE01);
        for _ in 0..220 {
            let d = random_dataset(&mut rng, 50, 6);
            let h = database_entropy(&d).unwrap();
            assert!((h - oracle_database_entropy(&d)).abs() < 1e-9);
            for f in 0..d.arity() {
                let avg = feature_average_entropy(&d, f).unwrap();
                assert!((avg - oracle_feature_average_entropy(&d, f)).abs() < 1e-9);
                let gain = information_gain(&d, f).unwrap();
                assert!((gain - oracle_information_gain(&d, f)).abs() < 1e-9);
            }
        }
        assert!(start.elapsed() < Duration::from_secs(5), "budget exceeded");
    });
}

// -------------------------------------------------------------------------
// 2. Gain bounds and exact endpoint cases

#[test]
fn criterion_2_gain_bounds() {
    criterion(2, "gains bounded, endpoints exact", || {
        let mut rng = Rng::new(0xACCE02);
        for _ in 0..220 {
            let d = random_dataset(&mut rng, 50, 6);
            let h = database_entropy(&d).unwrap();
            let w = ig_weights(&d).unwrap();
            for &g in w.gains() {
                assert!(g >= 0.0, "negative gain {g}");
                assert!(g <= h + 1e-9, "gain {g} above entropy {h}");
            }

            // Append a constant column and a category-copy column: their
            // gains must be exactly 0 and exactly H(D).
            let mut kinds = d.schema().kinds();
            kinds.push(mbl::FeatureKind::Symbolic);
            kinds.push(mbl::FeatureKind::Symbolic);
            let instances: Vec<Pattern> = d
                .instances()
                .iter()
                .map(|p| {
                    let mut values = p.values().to_vec();
                    values.push(FeatureValue::symbolic("const"));
                    values.push(FeatureValue::symbolic(p.category().unwrap()));
                    Pattern::with_category(values, p.category().unwrap())
                })
                .collect();
            let extended = mbl::Dataset::from_patterns(&kinds, None, instances).unwrap();
            let constant_f = extended.arity() - 2;
            let predictive_f = extended.arity() - 1;
            assert_eq!(information_gain(&extended, constant_f).unwrap(), 0.0);
            assert_eq!(
                information_gain(&extended, predictive_f).unwrap(),
                database_entropy(&extended).unwrap()
            );
        }
    });
}

// -------------------------------------------------------------------------
// 3. Nearest-neighbour oracle equivalence

fn config_matrix() -> Vec<TrainConfig> {
    let mut configs = Vec::new();
    for weighting in [Weighting::None, Weighting::InformationGain] {
        for metrics in [
            MetricSpec::Default,
            MetricSpec::Uniform(MetricChoice::Overlap),
            MetricSpec::Uniform(MetricChoice::Vdm),
            MetricSpec::Uniform(MetricChoice::TagSet),
        ] {
            configs.push(TrainConfig {
                weighting,
                metrics,
                k: 1,
            });
        }
    }
    configs
}

#[test]
fn criterion_3_nearest_neighbour_oracle() {
    criterion(3, "classify equals exhaustive scan", || {
        let start = Instant::now();
        let mut rng = Rng::new(0xACCE03);
        let configs = config_matrix();
        for i in 0..104 {
            let d = random_dataset(&mut rng, 200, 6);
            let config = &configs[i % configs.len()];
            let base = train(d.clone(), config).unwrap();
            for _ in 0..25 {
                let query = random_query(&mut rng, &d);
                let got = base.classify(&query).unwrap();
                let want = oracle_classify(
                    base.dataset(),
                    base.metrics(),
                    base.weights().gains(),
                    &query,
                );
                assert_eq!(got.category, want.category);
                assert_eq!(got.distance, want.distance);
                assert_eq!(got.neighbour_index, want.neighbour_index);
                assert_eq!(got.tie_count, want.tie_count);
            }
        }
        assert!(start.elapsed() < Duration::from_secs(10), "budget exceeded");
    });
}

// -------------------------------------------------------------------------
// 4. Distance axioms and weight-rescaling invariance

#[test]
fn criterion_4_distance_axioms() {
    criterion(4, "distance axioms and rescale invariance", || {
        let mut rng = Rng::new(0xACCE04);
        let configs = config_matrix();

        // Identity and symmetry over 10,000 random pattern pairs.
        let mut pairs = 0;
        while pairs < 10_000 {
            let d = random_dataset(&mut rng, 40, 5);
            let config = &configs[pairs % configs.len()];
            let base = train(d.clone(), config).unwrap();
            for _ in 0..50 {
                let x = random_query(&mut rng, &d);
                let y = random_query(&mut rng, &d);
                assert_eq!(base.distance(&x, &x).unwrap(), 0.0);
                assert_eq!(base.distance(&y, &y).unwrap(), 0.0);
                assert_eq!(
                    base.distance(&x, &y).unwrap(),
                    base.distance(&y, &x).unwrap()
                );
                pairs += 1;
            }
        }

        // Uniform positive rescaling never changes the prediction.
        for trial in 0..1_000 {
            let d = random_dataset(&mut rng, 60, 5);
            let config = &configs[trial % configs.len()];
            let mut base = train(d.clone(), config).unwrap();
            let weights: Vec<f64> = (0..d.arity()).map(|_| rng.next_f64() + 0.01).collect();
            let scale = 0.125 + rng.next_f64() * 8.0;
            let query = random_query(&mut rng, &d);

            base.set_weights(WeightVector::from_gains(weights.clone()))
                .unwrap();
            let before = base.classify(&query).unwrap();
            base.set_weights(WeightVector::from_gains(
                weights.iter().map(|w| w * scale).collect(),
            ))
            .unwrap();
            let after = base.classify(&query).unwrap();
            assert_eq!(before.category, after.category);
            assert_eq!(before.neighbour_index, after.neighbour_index);
        }
    });
}

// -------------------------------------------------------------------------
// 5. Qualitative gain profile of the diminutive-suffix task

const DIM_NUCLEI: [&str; 10] = ["a", "e", "i", "o", "u", "aa", "ee", "oo", "eu", "ui"];
const DIM_ONSETS: [&str; 12] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t"];
const DIM_CODAS: [&str; 10] = ["", "f", "k", "l", "m", "n", "ng", "r", "s", "t"];
const DIM_SUFFIXES: [&str; 5] = ["tje", "je", "pje", "kje", "etje"];

fn suffix_rule(nucleus: &str, coda: &str) -> &'static str {
    let long = (nucleus.len() > 1) as usize;
    let coda_class = match coda {
        "" => 0,
        "l" | "m" | "n" | "ng" | "r" => 1,
        _ => 2,
    };
    [["tje", "etje", "pje"], ["je", "kje", "etje"]][long][coda_class]
}

fn diminutive_words(rng: &mut Rng, n: usize) -> Vec<SyllabifiedWord> {
    (0..n)
        .map(|_| {
            let nuc2 = *rng.choose(&DIM_NUCLEI);
            let cod2 = *rng.choose(&DIM_CODAS);
            let ons2 = *rng.choose(&DIM_ONSETS);
            let str2 = rng.next_below(2) == 0;
            // Ten percent label noise on top of the deterministic rule.
            let label = if rng.next_below(10) == 0 {
                *rng.choose(&DIM_SUFFIXES)
            } else {
                suffix_rule(nuc2, cod2)
            };
            let last = Syllable::new(ons2, nuc2, cod2, str2).unwrap();
            let syllables = if rng.next_below(10) == 0 {
                vec![last]
            } else {
                // First syllable: rime mildly correlated with the final one,
                // stress an independent coin.
                let nuc1 = if rng.next_below(4) == 0 {
                    nuc2
                } else {
                    *rng.choose(&DIM_NUCLEI)
                };
                let first = Syllable::new(
                    *rng.choose(&DIM_ONSETS),
                    nuc1,
                    *rng.choose(&DIM_CODAS),
                    rng.next_below(2) == 0,
                )
                .unwrap();
                vec![first, last]
            };
            SyllabifiedWord::new(syllables, label).unwrap()
        })
        .collect()
}

#[test]
fn criterion_5_diminutive_gain_profile() {
    criterion(5, "final rime dominates the gain profile", || {
        let start = Instant::now();
        let mut rng = Rng::new(0xACCE05);
        let words = diminutive_words(&mut rng, 2_500);
        assert!(words.len() >= 2_000);
        let d = syllable_dataset(&words, 2).unwrap();
        assert_eq!(d.arity(), 8);

        let w = ig_weights(&d).unwrap();
        let mut order: Vec<usize> = (0..8).collect();
        order.sort_by(|&a, &b| w.gain(b).total_cmp(&w.gain(a)));

        // Feature layout: str1 ons1 nuc1 cod1 str2 ons2 nuc2 cod2.
        let top2: BTreeSet<usize> = order[..2].iter().copied().collect();
        assert_eq!(
            top2,
            BTreeSet::from([6, 7]),
            "top-2 gains are not the final nucleus and coda: {order:?} {:?}",
            w.gains()
        );
        let rank = |f: usize| order.iter().position(|&g| g == f).unwrap();
        assert!(rank(0) >= 4, "str1 ranks in the top half");
        assert!(rank(4) >= 4, "str2 ranks in the top half");

        assert!(start.elapsed() < Duration::from_secs(30), "budget exceeded");
    });
}

// -------------------------------------------------------------------------
// 6. Syllable-boundary segmentation round trip

const SEG_VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
const SEG_ONSETS: [&str; 14] = [
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
];
const SEG_CODAS: [&str; 8] = ["k", "l", "m", "n", "p", "r", "s", "t"];

fn phonotactic_word(rng: &mut Rng) -> SymbolSequence {
    let n_syl = 2 + rng.next_below(3) as usize;
    let mut items: Vec<String> = Vec::new();
    let mut flags: Vec<bool> = Vec::new();
    for s in 0..n_syl {
        let mut push = |letter: &str, boundary: bool| {
            items.push(letter.to_string());
            flags.push(boundary);
        };
        push(rng.choose(&SEG_ONSETS), s > 0);
        push(rng.choose(&SEG_VOWELS), false);
        if rng.next_below(2) == 0 {
            push(rng.choose(&SEG_CODAS), false);
        }
    }
    SymbolSequence::new(items).with_boundaries(flags).unwrap()
}

#[test]
fn criterion_6_segmentation_round_trip() {
    criterion(6, "boundary prediction beats 0.95 held out", || {
        let start = Instant::now();
        let mut rng = Rng::new(0xACCE06);
        let words: Vec<SymbolSequence> = (0..5_000).map(|_| phonotactic_word(&mut rng)).collect();
        let (train_words, test_words) = words.split_at(4_500);

        let train_set =
            mbl::tasks::window_segmentation_all(train_words, 3, 3, "_").unwrap();
        let test_set = mbl::tasks::window_segmentation_all(test_words, 3, 3, "_").unwrap();

        let weighted = train(
            train_set.clone(),
            &TrainConfig {
                weighting: Weighting::InformationGain,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        let unweighted = train(
            train_set,
            &TrainConfig {
                weighting: Weighting::None,
                ..TrainConfig::default()
            },
        )
        .unwrap();

        let acc_weighted = evaluate(&weighted, test_set.instances()).unwrap().accuracy();
        let acc_unweighted = evaluate(&unweighted, test_set.instances())
            .unwrap()
            .accuracy();

        assert!(
            acc_weighted >= 0.95,
            "weighted boundary accuracy {acc_weighted} below 0.95"
        );
        assert!(
            acc_unweighted >= 0.95,
            "unweighted boundary accuracy {acc_unweighted} below 0.95"
        );
        assert!(
            acc_weighted >= acc_unweighted,
            "gain weighting hurt accuracy: {acc_weighted} < {acc_unweighted}"
        );
        assert!(start.elapsed() < Duration::from_secs(60), "budget exceeded");
    });
}

// -------------------------------------------------------------------------
// 7. Tagging pipeline on a context-determined two-tag corpus

const TAG_NOUNS: [&str; 4] = ["stone", "tree", "house", "fish"];
const TAG_VERBS: [&str; 4] = ["goes", "fell", "sings", "waits"];
const TAG_AMBIG: [&str; 4] = ["duck", "walks", "hunts", "man"];

fn two_tag_corpus(rng: &mut Rng, sentences: usize) -> Vec<(Vec<String>, Vec<String>)> {
    // Sentence shape noun-verb-noun; ambiguous words may fill any slot, and
    // the window of ambiguous categories determines the tag uniquely.
    (0..sentences)
        .map(|_| {
            let mut words = Vec::new();
            let mut tags = Vec::new();
            for (slot, tag) in ["noun", "verb", "noun"].iter().enumerate() {
                let ambiguous = rng.next_below(2) == 0;
                let word = if ambiguous {
                    *rng.choose(&TAG_AMBIG)
                } else if slot == 1 {
                    *rng.choose(&TAG_VERBS)
                } else {
                    *rng.choose(&TAG_NOUNS)
                };
                words.push(word.to_string());
                tags.push(tag.to_string());
            }
            (words, tags)
        })
        .collect()
}

#[test]
fn criterion_7_tagging_pipeline() {
    criterion(7, "tagging pipeline: held-in 100%, CV >= 0.95", || {
        let start = Instant::now();
        let mut rng = Rng::new(0xACCE07);
        let raw = two_tag_corpus(&mut rng, 200);
        let corpus = mbl::TaggedCorpus::new(
            raw.iter()
                .map(|(words, tags)| {
                    SymbolSequence::new(words.iter().cloned())
                        .with_tags(tags.iter().cloned())
                        .unwrap()
                })
                .collect(),
        )
        .unwrap();

        let lexicon = derive_lexicon(&corpus).unwrap();
        // The ambiguous words must have been observed under both tags.
        for word in TAG_AMBIG {
            assert_eq!(lexicon.get(word).unwrap().tags().len(), 2);
        }
        let fallback = lexicon.all_tags().unwrap();
        let retagged = retag_corpus(&corpus, &lexicon, &fallback);
        assert_eq!(retagged.unknown_tokens, 0);
        let dataset = build_tagging_dataset(&retagged.sentences, 1, 1, "<pad>").unwrap();
        let base = train(dataset.clone(), &TrainConfig::default()).unwrap();

        // Held-in tagging is perfect: every window determines its tag.
        let config = TaggerConfig {
            left: 1,
            right: 1,
            pad: "<pad>".to_string(),
            fallback,
        };
        let mut correct = 0;
        let mut total = 0;
        for (words, gold) in &raw {
            let out = tag(words, &lexicon, &base, &config).unwrap();
            total += gold.len();
            correct += out
                .tags
                .iter()
                .zip(gold)
                .filter(|(a, b)| a.as_str() == b.as_str())
                .count();
        }
        assert_eq!(correct, total, "held-in accuracy below 100%");

        let report = cross_validate(&dataset, &TrainConfig::default(), 42, false).unwrap();
        assert!(
            report.mean() >= 0.95,
            "cross-validated mean {} below 0.95",
            report.mean()
        );
        assert!(start.elapsed() < Duration::from_secs(30), "budget exceeded");
    });
}

// -------------------------------------------------------------------------
// 8. Determinism and persistence

#[test]
fn criterion_8_determinism_and_persistence() {
    criterion(8, "seeded runs bitwise equal; models persist", || {
        let mut rng = Rng::new(0xACCE08);
        let d = random_dataset(&mut rng, 200, 5);

        // Repeated xval through the CLI is byte-identical.
        let dir = tempfile::tempdir().unwrap();
        let data_path = dir.path().join("data.csv");
        std::fs::write(&data_path, serialize_dataset(&d)).unwrap();
        let xval_once = || {
            let mut stdout = Vec::new();
            let mut stderr = Vec::new();
            let code = mbl::cli::run(
                [
                    "mbl",
                    "xval",
                    "-i",
                    data_path.to_str().unwrap(),
                    "--seed",
                    "42",
                    "--json",
                ],
                &mut Cursor::new(Vec::new()),
                &mut stdout,
                &mut stderr,
            );
            assert_eq!(code, 0, "xval failed: {}", String::from_utf8_lossy(&stderr));
            stdout
        };
        let first = xval_once();
        let second = xval_once();
        assert_eq!(first, second, "same-seed xval output differs");

        // Save/load reproduces classifications on 100 probes.
        let base = train(d.clone(), &TrainConfig::default()).unwrap();
        let loaded = InstanceBase::from_bytes(&base.to_bytes()).unwrap();
        for _ in 0..100 {
            let probe = random_query(&mut rng, &d);
            assert_eq!(
                base.classify(&probe).unwrap(),
                loaded.classify(&probe).unwrap()
            );
        }
    });
}

// -------------------------------------------------------------------------
// 9. Instance-file round trips

#[test]
fn criterion_9_format_round_trips() {
    criterion(9, "parse/serialize identity on 60 files", || {
        let mut rng = Rng::new(0xACCE09);
        let mut saw_tagset = false;
        let mut saw_missing = false;
        for _ in 0..60 {
            let d = random_dataset(&mut rng, 40, 6);
            saw_tagset |= d
                .schema()
                .kinds()
                .contains(&mbl::FeatureKind::TagSet);
            saw_missing |= d
                .instances()
                .iter()
                .any(|p| p.values().iter().any(|v| v.is_missing()));
            let text = serialize_dataset(&d);
            let back = parse_dataset(&text, None).unwrap();
            assert_eq!(back, d, "round trip changed the dataset");
            assert_eq!(serialize_dataset(&back), text);
        }
        assert!(saw_tagset, "corpus never exercised tag sets");
        assert!(saw_missing, "corpus never exercised missing values");
    });
}
