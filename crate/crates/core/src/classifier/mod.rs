//! The lazy-learning core: training stores instances verbatim, and
//! classification retrieves the least distant stored instance under a
//! weighted per-feature distance.
//!
//! The search is an exhaustive linear scan over the instance base. To keep
//! it cheap, training interns every feature value and category into small
//! integer codes; a query is translated once into per-code delta lookup
//! tables, after which each stored instance costs one table lookup and one
//! multiply-add per feature. Scan workspaces live in thread-local scratch,
//! so queries allocate nothing once a thread is warmed up.

mod metrics;
mod model_io;

pub use metrics::{delta_numeric, delta_overlap, delta_tagset, VdmEntry, VdmTable};

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::data::{DataError, Dataset, FeatureKind, FeatureValue, Pattern};
use crate::weighting::{ig_weights, WeightVector};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("pattern arity {found} does not match schema arity {expected}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("cannot train on an empty dataset")]
    EmptyDataset,
    #[error("invalid configuration: {detail}")]
    BadConfig { detail: String },
    #[error("corrupt model: {detail}")]
    CorruptModel { detail: String },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Whether per-feature distance weights come from information gain or are
/// uniform (every feature weighs 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    None,
    InformationGain,
}

/// The distance component used for one feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricChoice {
    Overlap,
    Numeric,
    Vdm,
    TagSet,
}

impl MetricChoice {
    pub fn parse_token(token: &str) -> Result<MetricChoice, ModelError> {
        match token.trim() {
            "overlap" => Ok(MetricChoice::Overlap),
            "num" | "numeric" => Ok(MetricChoice::Numeric),
            "vdm" => Ok(MetricChoice::Vdm),
            "tagset" => Ok(MetricChoice::TagSet),
            other => Err(ModelError::BadConfig {
                detail: format!("unknown metric {other:?} (expected overlap, vdm or tagset)"),
            }),
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            MetricChoice::Overlap => "overlap",
            MetricChoice::Numeric => "numeric",
            MetricChoice::Vdm => "vdm",
            MetricChoice::TagSet => "tagset",
        }
    }
}

/// Metric selection: by kind (numeric columns scale, tag-set columns use
/// Jaccard, symbolic columns use overlap), one choice for all non-numeric
/// columns, or an explicit per-feature list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricSpec {
    Default,
    Uniform(MetricChoice),
    PerFeature(Vec<MetricChoice>),
}

impl MetricSpec {
    fn resolve(&self, kinds: &[FeatureKind]) -> Result<Vec<MetricChoice>, ModelError> {
        let by_kind = |kind: FeatureKind| match kind {
            FeatureKind::Numeric => MetricChoice::Numeric,
            FeatureKind::TagSet => MetricChoice::TagSet,
            FeatureKind::Symbolic => MetricChoice::Overlap,
        };
        match self {
            MetricSpec::Default => Ok(kinds.iter().map(|&k| by_kind(k)).collect()),
            MetricSpec::Uniform(choice) => {
                if *choice == MetricChoice::Numeric {
                    return Err(ModelError::BadConfig {
                        detail: "the numeric metric applies only to numeric columns".into(),
                    });
                }
                Ok(kinds
                    .iter()
                    .map(|&k| {
                        if k == FeatureKind::Numeric {
                            MetricChoice::Numeric
                        } else {
                            *choice
                        }
                    })
                    .collect())
            }
            MetricSpec::PerFeature(choices) => {
                if choices.len() != kinds.len() {
                    return Err(ModelError::BadConfig {
                        detail: format!(
                            "metric list has {} entries, schema has {} features",
                            choices.len(),
                            kinds.len()
                        ),
                    });
                }
                for (f, (&choice, &kind)) in choices.iter().zip(kinds).enumerate() {
                    let numeric_col = kind == FeatureKind::Numeric;
                    let numeric_metric = choice == MetricChoice::Numeric;
                    if numeric_col != numeric_metric {
                        return Err(ModelError::BadConfig {
                            detail: format!(
                                "feature {f}: metric {} does not fit a {} column",
                                choice.token(),
                                kind.token()
                            ),
                        });
                    }
                }
                Ok(choices.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub weighting: Weighting,
    pub metrics: MetricSpec,
    /// Number of neighbours consulted by [`InstanceBase::classify`].
    pub k: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            weighting: Weighting::InformationGain,
            metrics: MetricSpec::Default,
            k: 1,
        }
    }
}

/// Outcome of classifying one pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub category: String,
    /// Distance to the winning stored instance.
    pub distance: f64,
    /// Position of the winning instance in the stored dataset.
    pub neighbour_index: usize,
    /// Number of stored instances tied at the minimum distance.
    pub tie_count: usize,
}

// Interned representation of the stored instances: one u32 code per value
// (codes index the per-feature value table) and one per category.
#[derive(Debug, Clone)]
struct Engine {
    codes: Vec<u32>,
    cat_codes: Vec<u32>,
    value_tables: Vec<ValueTable>,
}

#[derive(Debug, Clone)]
struct ValueTable {
    values: Vec<FeatureValue>,
    index: HashMap<FeatureValue, u32>,
}

impl ValueTable {
    fn code(&self, v: &FeatureValue) -> Option<u32> {
        self.index.get(v).copied()
    }
}

/// Code standing in for a query value never seen in training: it compares
/// unequal to every stored code.
const UNSEEN: u32 = u32::MAX;

#[derive(Default)]
struct Scratch {
    prepared: Vec<Prepared>,
    arena: Vec<f64>,
    tied: Vec<u32>,
    cat_counts: Vec<u32>,
    all: Vec<(f64, u32)>,
}

#[derive(Clone, Copy)]
enum Prepared {
    Exact(u32),
    Table { offset: usize },
}

thread_local! {
    static SCRATCH: RefCell<Scratch> = RefCell::new(Scratch::default());
}

/// A trained memory-based classifier: the stored training data plus the
/// weights, metric choices and value statistics needed to compute distances.
/// Immutable after training; classification is a pure read and safe to run
/// from many threads at once.
#[derive(Debug)]
pub struct InstanceBase {
    dataset: Dataset,
    weighting: Weighting,
    weights: WeightVector,
    metrics: Vec<MetricChoice>,
    vdm_tables: Vec<Option<VdmTable>>,
    default_k: usize,
    categories: Vec<String>,
    engine: Engine,
    vdm_fallbacks: AtomicU64,
}

/// Trains a base: stores all instances verbatim, computes information-gain
/// weights if enabled, and builds value-difference count tables for every
/// feature configured for that metric. Numeric bounds are frozen from the
/// training data.
pub fn train(dataset: Dataset, config: &TrainConfig) -> Result<InstanceBase, ModelError> {
    if dataset.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    if config.k == 0 {
        return Err(ModelError::BadConfig {
            detail: "k must be at least 1".into(),
        });
    }
    let kinds = dataset.schema().kinds();
    let metrics = config.metrics.resolve(&kinds)?;
    let weights = match config.weighting {
        Weighting::InformationGain => ig_weights(&dataset)?,
        Weighting::None => WeightVector::uniform(dataset.arity()),
    };
    let categories: Vec<String> = dataset.categories().iter().cloned().collect();
    let vdm_tables = metrics
        .iter()
        .enumerate()
        .map(|(f, &m)| match m {
            MetricChoice::Vdm => Some(VdmTable::build(&dataset, f, &categories)),
            _ => None,
        })
        .collect();
    InstanceBase::assemble(
        dataset,
        config.weighting,
        metrics,
        weights,
        vdm_tables,
        config.k,
    )
}

impl InstanceBase {
    /// Wires up a base from its parts; shared by training and model loading.
    pub(crate) fn assemble(
        dataset: Dataset,
        weighting: Weighting,
        metrics: Vec<MetricChoice>,
        weights: WeightVector,
        vdm_tables: Vec<Option<VdmTable>>,
        default_k: usize,
    ) -> Result<InstanceBase, ModelError> {
        let n = dataset.arity();
        if weights.len() != n || metrics.len() != n || vdm_tables.len() != n {
            return Err(ModelError::BadConfig {
                detail: "weights, metrics and tables must match the schema arity".into(),
            });
        }
        for (f, (&m, t)) in metrics.iter().zip(&vdm_tables).enumerate() {
            if (m == MetricChoice::Vdm) != t.is_some() {
                return Err(ModelError::BadConfig {
                    detail: format!("feature {f}: value-difference table presence mismatch"),
                });
            }
        }
        let categories: Vec<String> = dataset.categories().iter().cloned().collect();
        let engine = Engine::build(&dataset, &categories);
        Ok(InstanceBase {
            dataset,
            weighting,
            weights,
            metrics,
            vdm_tables,
            default_k,
            categories,
            engine,
            vdm_fallbacks: AtomicU64::new(0),
        })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn schema(&self) -> &crate::data::FeatureSchema {
        self.dataset.schema()
    }

    pub fn arity(&self) -> usize {
        self.dataset.arity()
    }

    /// Number of stored training instances.
    pub fn instance_count(&self) -> usize {
        self.dataset.len()
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn metrics(&self) -> &[MetricChoice] {
        &self.metrics
    }

    pub fn default_k(&self) -> usize {
        self.default_k
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    /// Replaces the weight vector (weights must be finite and nonnegative).
    pub fn set_weights(&mut self, weights: WeightVector) -> Result<(), ModelError> {
        if weights.len() != self.arity() {
            return Err(ModelError::BadConfig {
                detail: "weight vector length must match the schema arity".into(),
            });
        }
        if weights.gains().iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(ModelError::BadConfig {
                detail: "weights must be finite and nonnegative".into(),
            });
        }
        self.weights = weights;
        Ok(())
    }

    /// Number of value-difference delta evaluations that fell back to
    /// overlap because a value was never seen in training.
    pub fn vdm_fallback_count(&self) -> u64 {
        self.vdm_fallbacks.load(Ordering::Relaxed)
    }

    /// True if any value of `x` (missing included) was never observed for
    /// its feature in the training data.
    pub fn has_unseen_value(&self, x: &Pattern) -> bool {
        x.values()
            .iter()
            .zip(&self.engine.value_tables)
            .any(|(v, t)| t.code(v).is_none())
    }

    /// Weighted distance between two patterns under this base's metric
    /// configuration: `Σ_f w_f · δ_f(x_f, y_f)`.
    pub fn distance(&self, x: &Pattern, y: &Pattern) -> Result<f64, ModelError> {
        self.check_arity(x)?;
        self.check_arity(y)?;
        let mut sum = 0.0;
        for f in 0..self.arity() {
            let (d, fell_back) = self.pair_delta(f, x.value(f), y.value(f));
            if fell_back {
                self.vdm_fallbacks.fetch_add(1, Ordering::Relaxed);
            }
            sum += self.weights.gain(f) * d;
        }
        Ok(sum)
    }

    /// Value-difference distance between two values of feature `f`,
    /// falling back to overlap (and bumping the fallback counter) when
    /// either value was not seen in training.
    pub fn delta_vdm(&self, f: usize, v1: &FeatureValue, v2: &FeatureValue) -> f64 {
        assert!(
            self.metrics[f] == MetricChoice::Vdm,
            "feature {f} is not configured for the value-difference metric"
        );
        let (d, fell_back) = self.pair_delta(f, v1, v2);
        if fell_back {
            self.vdm_fallbacks.fetch_add(1, Ordering::Relaxed);
        }
        d
    }

    /// Per-feature delta under this base's configuration. The second
    /// component reports a value-difference fallback on unseen values.
    fn pair_delta(&self, f: usize, a: &FeatureValue, b: &FeatureValue) -> (f64, bool) {
        match (a.is_missing(), b.is_missing()) {
            (true, true) => return (0.0, false),
            (true, false) | (false, true) => return (1.0, false),
            _ => {}
        }
        match self.metrics[f] {
            MetricChoice::Overlap => (delta_overlap(a, b), false),
            MetricChoice::TagSet => (delta_tagset(a, b), false),
            MetricChoice::Numeric => match (a, b) {
                (FeatureValue::Numeric(x), FeatureValue::Numeric(y)) => {
                    let (min, max) = self
                        .dataset
                        .schema()
                        .feature(f)
                        .bounds()
                        .unwrap_or((0.0, 0.0));
                    (delta_numeric(*x, *y, min, max), false)
                }
                _ => (delta_overlap(a, b), false),
            },
            MetricChoice::Vdm => {
                let table = self.vdm_tables[f].as_ref().expect("vdm table present");
                match table.delta(a, b) {
                    Some(d) => (d, false),
                    None => (delta_overlap(a, b), true),
                }
            }
        }
    }

    /// Classifies with the k configured at training time.
    pub fn classify(&self, x: &Pattern) -> Result<Classification, ModelError> {
        self.classify_k(x, self.default_k)
    }

    /// Nearest-neighbour classification. For `k = 1` the winner is the
    /// least distant stored instance; among co-minimal instances the most
    /// frequent category wins and remaining ties go to the lowest stored
    /// index. For `k > 1` the k nearest instances (distance, then index)
    /// vote by majority under the same tie rules.
    pub fn classify_k(&self, x: &Pattern, k: usize) -> Result<Classification, ModelError> {
        assert!(k >= 1, "k must be at least 1");
        self.check_arity(x)?;
        SCRATCH.with(|scratch| {
            let mut s = scratch.borrow_mut();
            self.prepare_query(&mut s, x);
            if k == 1 {
                Ok(self.scan_nearest(&mut s))
            } else {
                Ok(self.scan_k(&mut s, k))
            }
        })
    }

    fn check_arity(&self, x: &Pattern) -> Result<(), ModelError> {
        if x.arity() != self.arity() {
            return Err(ModelError::ArityMismatch {
                expected: self.arity(),
                found: x.arity(),
            });
        }
        Ok(())
    }

    /// Translates a query into per-feature lookup structures: either an
    /// interned code to compare for equality, or a per-code delta table.
    fn prepare_query(&self, s: &mut Scratch, x: &Pattern) {
        s.prepared.clear();
        s.arena.clear();
        for (f, qv) in x.values().iter().enumerate() {
            let table = &self.engine.value_tables[f];
            match self.metrics[f] {
                MetricChoice::Overlap => {
                    s.prepared
                        .push(Prepared::Exact(table.code(qv).unwrap_or(UNSEEN)));
                }
                MetricChoice::Vdm => {
                    // One fallback event per query feature with an unseen,
                    // non-missing value.
                    if !qv.is_missing() {
                        let vdm = self.vdm_tables[f].as_ref().expect("vdm table present");
                        if !vdm.contains(qv) {
                            self.vdm_fallbacks.fetch_add(1, Ordering::Relaxed);
                        }
                    }
                    let offset = s.arena.len();
                    for v in &table.values {
                        s.arena.push(self.pair_delta(f, qv, v).0);
                    }
                    s.prepared.push(Prepared::Table { offset });
                }
                MetricChoice::Numeric | MetricChoice::TagSet => {
                    let offset = s.arena.len();
                    for v in &table.values {
                        s.arena.push(self.pair_delta(f, qv, v).0);
                    }
                    s.prepared.push(Prepared::Table { offset });
                }
            }
        }
    }

    #[inline]
    fn row_distance(&self, s: &Scratch, row: &[u32], cutoff: f64) -> Option<f64> {
        let mut sum = 0.0;
        for (f, &code) in row.iter().enumerate() {
            let d = match s.prepared[f] {
                Prepared::Exact(qcode) => {
                    if code == qcode {
                        0.0
                    } else {
                        1.0
                    }
                }
                Prepared::Table { offset } => s.arena[offset + code as usize],
            };
            sum += self.weights.gain(f) * d;
            // All increments are nonnegative, so a partial sum already
            // beyond the cutoff can be abandoned without affecting the
            // co-minimal set.
            if sum > cutoff {
                return None;
            }
        }
        Some(sum)
    }

    fn scan_nearest(&self, s: &mut Scratch) -> Classification {
        let n = self.arity();
        s.tied.clear();
        let mut best = f64::INFINITY;
        for i in 0..self.instance_count() {
            let row = &self.engine.codes[i * n..(i + 1) * n];
            match self.row_distance(s, row, best) {
                None => {}
                Some(sum) => {
                    if sum < best {
                        best = sum;
                        s.tied.clear();
                        s.tied.push(i as u32);
                    } else {
                        // row_distance returned, so sum <= best.
                        s.tied.push(i as u32);
                    }
                }
            }
        }
        let winner = self.break_ties(s);
        Classification {
            category: self.categories[self.engine.cat_codes[winner] as usize].clone(),
            distance: best,
            neighbour_index: winner,
            tie_count: s.tied.len(),
        }
    }

    fn scan_k(&self, s: &mut Scratch, k: usize) -> Classification {
        let n = self.arity();
        s.all.clear();
        for i in 0..self.instance_count() {
            let row = &self.engine.codes[i * n..(i + 1) * n];
            let sum = self
                .row_distance(s, row, f64::INFINITY)
                .expect("no cutoff in effect");
            s.all.push((sum, i as u32));
        }
        s.all
            .sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let m = k.min(s.all.len());
        let min_distance = s.all[0].0;
        let tie_count = s.all.iter().take_while(|e| e.0 == min_distance).count();

        s.tied.clear();
        for &(_, i) in &s.all[..m] {
            s.tied.push(i);
        }
        let winner = self.break_ties(s);
        let distance = s.all[..m]
            .iter()
            .find(|&&(_, i)| i as usize == winner)
            .map(|&(d, _)| d)
            .unwrap();
        Classification {
            category: self.categories[self.engine.cat_codes[winner] as usize].clone(),
            distance,
            neighbour_index: winner,
            tie_count,
        }
    }

    /// Majority category over `s.tied`, preferring the earliest entry of a
    /// winning category. For the k-NN vote the entries arrive sorted by
    /// (distance, index); for the 1-NN path they are co-minimal and sorted
    /// by index, so "earliest" means lowest stored index.
    fn break_ties(&self, s: &mut Scratch) -> usize {
        debug_assert!(!s.tied.is_empty());
        if s.tied.len() == 1 {
            return s.tied[0] as usize;
        }
        s.cat_counts.clear();
        s.cat_counts.resize(self.categories.len(), 0);
        for &i in &s.tied {
            s.cat_counts[self.engine.cat_codes[i as usize] as usize] += 1;
        }
        let max = s
            .tied
            .iter()
            .map(|&i| s.cat_counts[self.engine.cat_codes[i as usize] as usize])
            .max()
            .unwrap();
        s.tied
            .iter()
            .copied()
            .find(|&i| s.cat_counts[self.engine.cat_codes[i as usize] as usize] == max)
            .unwrap() as usize
    }

    pub(crate) fn vdm_tables(&self) -> &[Option<VdmTable>] {
        &self.vdm_tables
    }
}

impl Engine {
    fn build(dataset: &Dataset, categories: &[String]) -> Engine {
        let n = dataset.arity();
        assert!(dataset.len() < u32::MAX as usize, "instance base too large");
        let value_tables: Vec<ValueTable> = (0..n)
            .map(|f| {
                let values: Vec<FeatureValue> =
                    dataset.schema().feature(f).values().iter().cloned().collect();
                assert!(values.len() < UNSEEN as usize, "value inventory too large");
                let index = values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v.clone(), i as u32))
                    .collect();
                ValueTable { values, index }
            })
            .collect();
        let mut codes = Vec::with_capacity(dataset.len() * n);
        for inst in dataset.instances() {
            for (f, v) in inst.values().iter().enumerate() {
                codes.push(
                    value_tables[f]
                        .code(v)
                        .expect("training value missing from schema value set"),
                );
            }
        }
        let cat_codes = dataset
            .instances()
            .iter()
            .map(|inst| {
                categories
                    .binary_search_by(|c| c.as_str().cmp(inst.category().unwrap()))
                    .expect("category missing from inventory") as u32
            })
            .collect();
        Engine {
            codes,
            cat_codes,
            value_tables,
        }
    }
}
