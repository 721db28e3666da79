//! Instance data model and the plain-text instance-file format.
//!
//! An instance file is UTF-8 text with one instance per line: fields are
//! comma-separated, the category label comes last, `#`-prefixed lines are
//! comments and blank lines are ignored. A `#kinds:sym,num,tag` comment (or
//! an explicit declaration passed to [`parse_dataset`]) fixes the per-column
//! value kind; without either, every column is symbolic. Inside a field,
//! `|` joins the tags of a tag-set value and `=` is the reserved missing
//! marker, so neither can occur in ordinary values. Commas cannot appear
//! inside values (there is no quoting), and fields are whitespace-trimmed,
//! so values must not start or end with whitespace.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use thiserror::Error;

/// Reserved field text for an explicitly absent value.
pub const MISSING_MARKER: &str = "=";

/// Separator between the tags of a tag-set field.
pub const TAG_SEPARATOR: char = '|';

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DataError {
    #[error("line {line}: expected {expected} comma-separated fields, found {found}")]
    ArityMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: cannot parse numeric field {field:?}")]
    BadNumeric { line: usize, field: String },
    #[error("dataset contains no instances")]
    EmptyDataset,
    #[error("line {line}: instance has no category label")]
    MissingCategory { line: usize },
    #[error("line {line}: value in column {feature} does not match the declared kind")]
    KindMismatch { line: usize, feature: usize },
    #[error("unknown feature kind {token:?} (expected sym, num or tag)")]
    BadKind { token: String },
    #[error("line {line}: {detail}")]
    BadHeader { line: usize, detail: String },
    #[error("a tag set must contain at least one tag")]
    EmptyTagSet,
}

/// A nonempty, duplicate-free, canonically sorted set of symbolic tags.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TagSet {
    tags: Vec<String>,
}

impl TagSet {
    pub fn new<I, S>(tags: I) -> Result<TagSet, DataError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut tags: Vec<String> = tags.into_iter().map(Into::into).collect();
        tags.sort();
        tags.dedup();
        if tags.is_empty() {
            return Err(DataError::EmptyTagSet);
        }
        Ok(TagSet { tags })
    }

    pub fn singleton(tag: impl Into<String>) -> TagSet {
        TagSet {
            tags: vec![tag.into()],
        }
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, tag: &str) -> bool {
        self.tags.binary_search_by(|t| t.as_str().cmp(tag)).is_ok()
    }

    /// The single tag of a singleton set, if this is one.
    pub fn as_singleton(&self) -> Option<&str> {
        match self.tags.as_slice() {
            [t] => Some(t),
            _ => None,
        }
    }
}

impl fmt::Display for TagSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tags.join(&TAG_SEPARATOR.to_string()))
    }
}

/// One feature value. Numeric values are finite by contract: the parser
/// rejects NaN and infinities, and programmatic construction should go
/// through [`FeatureValue::numeric`].
#[derive(Debug, Clone)]
pub enum FeatureValue {
    /// Explicit absence, e.g. a feature slot for a syllable the word does
    /// not have. Distinct from the empty-string symbolic value.
    Missing,
    Symbolic(String),
    Numeric(f64),
    TagSet(TagSet),
}

impl FeatureValue {
    pub fn symbolic(s: impl Into<String>) -> FeatureValue {
        FeatureValue::Symbolic(s.into())
    }

    /// Fails on NaN and infinities.
    pub fn numeric(x: f64) -> Result<FeatureValue, DataError> {
        if x.is_finite() {
            Ok(FeatureValue::Numeric(x))
        } else {
            Err(DataError::BadNumeric {
                line: 0,
                field: x.to_string(),
            })
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, FeatureValue::Missing)
    }

    fn rank(&self) -> u8 {
        match self {
            FeatureValue::Missing => 0,
            FeatureValue::Symbolic(_) => 1,
            FeatureValue::Numeric(_) => 2,
            FeatureValue::TagSet(_) => 3,
        }
    }

    /// Parses one trimmed field according to the column kind.
    pub fn parse_field(field: &str, kind: FeatureKind, line: usize) -> Result<FeatureValue, DataError> {
        if field == MISSING_MARKER {
            return Ok(FeatureValue::Missing);
        }
        match kind {
            FeatureKind::Symbolic => Ok(FeatureValue::Symbolic(field.to_string())),
            FeatureKind::Numeric => {
                let x: f64 = field.parse().map_err(|_| DataError::BadNumeric {
                    line,
                    field: field.to_string(),
                })?;
                if !x.is_finite() {
                    return Err(DataError::BadNumeric {
                        line,
                        field: field.to_string(),
                    });
                }
                Ok(FeatureValue::Numeric(x))
            }
            FeatureKind::TagSet => {
                let tags = field.split(TAG_SEPARATOR);
                Ok(FeatureValue::TagSet(TagSet::new(tags)?))
            }
        }
    }
}

impl PartialEq for FeatureValue {
    fn eq(&self, other: &Self) -> bool {
        use FeatureValue::*;
        match (self, other) {
            (Missing, Missing) => true,
            (Symbolic(a), Symbolic(b)) => a == b,
            // Bit equality keeps Eq/Ord/Hash mutually consistent.
            (Numeric(a), Numeric(b)) => a.to_bits() == b.to_bits(),
            (TagSet(a), TagSet(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for FeatureValue {}

impl PartialOrd for FeatureValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FeatureValue {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use FeatureValue::*;
        match (self, other) {
            (Symbolic(a), Symbolic(b)) => a.cmp(b),
            (Numeric(a), Numeric(b)) => a.total_cmp(b),
            (TagSet(a), TagSet(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl Hash for FeatureValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            FeatureValue::Missing => {}
            FeatureValue::Symbolic(s) => s.hash(state),
            FeatureValue::Numeric(x) => x.to_bits().hash(state),
            FeatureValue::TagSet(t) => t.hash(state),
        }
    }
}

impl fmt::Display for FeatureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureValue::Missing => write!(f, "{MISSING_MARKER}"),
            FeatureValue::Symbolic(s) => write!(f, "{s}"),
            FeatureValue::Numeric(x) => write!(f, "{x}"),
            FeatureValue::TagSet(t) => write!(f, "{t}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    Symbolic,
    Numeric,
    TagSet,
}

impl FeatureKind {
    pub fn parse_token(token: &str) -> Result<FeatureKind, DataError> {
        match token.trim() {
            "sym" | "symbolic" => Ok(FeatureKind::Symbolic),
            "num" | "numeric" => Ok(FeatureKind::Numeric),
            "tag" | "tagset" | "tag_set" => Ok(FeatureKind::TagSet),
            other => Err(DataError::BadKind {
                token: other.to_string(),
            }),
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            FeatureKind::Symbolic => "sym",
            FeatureKind::Numeric => "num",
            FeatureKind::TagSet => "tag",
        }
    }
}

/// Parses a comma-separated kind declaration such as `sym,num,tag`.
pub fn parse_kinds(decl: &str) -> Result<Vec<FeatureKind>, DataError> {
    decl.split(',').map(FeatureKind::parse_token).collect()
}

/// A feature-value vector, optionally carrying a gold category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    values: Vec<FeatureValue>,
    category: Option<String>,
}

impl Pattern {
    pub fn new(values: Vec<FeatureValue>) -> Pattern {
        Pattern {
            values,
            category: None,
        }
    }

    pub fn with_category(values: Vec<FeatureValue>, category: impl Into<String>) -> Pattern {
        Pattern {
            values,
            category: Some(category.into()),
        }
    }

    pub fn arity(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[FeatureValue] {
        &self.values
    }

    pub fn value(&self, f: usize) -> &FeatureValue {
        &self.values[f]
    }

    pub fn category(&self) -> Option<&str> {
        self.category.as_deref()
    }
}

/// Per-feature metadata observed in the data that built the schema.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureInfo {
    kind: FeatureKind,
    name: Option<String>,
    values: BTreeSet<FeatureValue>,
    bounds: Option<(f64, f64)>,
}

impl FeatureInfo {
    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// All distinct values observed for this feature, missing included.
    pub fn values(&self) -> &BTreeSet<FeatureValue> {
        &self.values
    }

    /// Observed (min, max) of a numeric feature; `None` if no numeric value
    /// was observed.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        self.bounds
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSchema {
    features: Vec<FeatureInfo>,
}

impl FeatureSchema {
    /// Builds a schema from declared kinds, optional display names and the
    /// instances the schema describes. Value sets and numeric bounds are
    /// computed from the instances.
    pub fn infer(
        kinds: &[FeatureKind],
        names: Option<&[Option<String>]>,
        instances: &[Pattern],
    ) -> FeatureSchema {
        if let Some(names) = names {
            assert_eq!(names.len(), kinds.len(), "names/kinds length mismatch");
        }
        let features = kinds
            .iter()
            .enumerate()
            .map(|(f, &kind)| {
                let mut values = BTreeSet::new();
                let mut bounds: Option<(f64, f64)> = None;
                for inst in instances {
                    let v = inst.value(f);
                    if let FeatureValue::Numeric(x) = *v {
                        bounds = Some(match bounds {
                            None => (x, x),
                            Some((lo, hi)) => (lo.min(x), hi.max(x)),
                        });
                    }
                    values.insert(v.clone());
                }
                FeatureInfo {
                    kind,
                    name: names.and_then(|ns| ns[f].clone()),
                    values,
                    bounds,
                }
            })
            .collect();
        FeatureSchema { features }
    }

    pub fn arity(&self) -> usize {
        self.features.len()
    }

    pub fn feature(&self, f: usize) -> &FeatureInfo {
        &self.features[f]
    }

    pub fn features(&self) -> &[FeatureInfo] {
        &self.features
    }

    pub fn kinds(&self) -> Vec<FeatureKind> {
        self.features.iter().map(|fi| fi.kind).collect()
    }

    /// Display name of feature `f`, defaulting to `f0..f(n-1)`.
    pub fn display_name(&self, f: usize) -> String {
        match self.features[f].name() {
            Some(name) => name.to_string(),
            None => format!("f{f}"),
        }
    }

    fn has_names(&self) -> bool {
        self.features.iter().any(|fi| fi.name.is_some())
    }
}

/// An ordered collection of labelled instances sharing one schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: FeatureSchema,
    instances: Vec<Pattern>,
    categories: BTreeSet<String>,
}

impl Dataset {
    /// Validates and assembles a dataset. Every pattern must carry a
    /// category, match the declared arity and match the per-column kinds
    /// (missing is allowed in any column).
    pub fn from_patterns(
        kinds: &[FeatureKind],
        names: Option<&[Option<String>]>,
        instances: Vec<Pattern>,
    ) -> Result<Dataset, DataError> {
        if instances.is_empty() {
            return Err(DataError::EmptyDataset);
        }
        for (i, inst) in instances.iter().enumerate() {
            let line = i + 1;
            if inst.arity() != kinds.len() {
                return Err(DataError::ArityMismatch {
                    line,
                    expected: kinds.len(),
                    found: inst.arity(),
                });
            }
            if inst.category().is_none() {
                return Err(DataError::MissingCategory { line });
            }
            for (f, v) in inst.values().iter().enumerate() {
                let ok = matches!(
                    (v, kinds[f]),
                    (FeatureValue::Missing, _)
                        | (FeatureValue::Symbolic(_), FeatureKind::Symbolic)
                        | (FeatureValue::Numeric(_), FeatureKind::Numeric)
                        | (FeatureValue::TagSet(_), FeatureKind::TagSet)
                );
                if !ok {
                    return Err(DataError::KindMismatch { line, feature: f });
                }
            }
        }
        let schema = FeatureSchema::infer(kinds, names, &instances);
        let categories = instances
            .iter()
            .map(|p| p.category().unwrap().to_string())
            .collect();
        Ok(Dataset {
            schema,
            instances,
            categories,
        })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn arity(&self) -> usize {
        self.schema.arity()
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn instances(&self) -> &[Pattern] {
        &self.instances
    }

    pub fn instance(&self, i: usize) -> &Pattern {
        &self.instances[i]
    }

    /// Category of instance `i`; total by the dataset invariant.
    pub fn category(&self, i: usize) -> &str {
        self.instances[i].category().unwrap()
    }

    /// Distinct category labels occurring in the instances.
    pub fn categories(&self) -> &BTreeSet<String> {
        &self.categories
    }

    pub fn category_counts(&self) -> BTreeMap<&str, usize> {
        let mut counts = BTreeMap::new();
        for inst in &self.instances {
            *counts.entry(inst.category().unwrap()).or_insert(0) += 1;
        }
        counts
    }

    /// The sub-dataset of instances whose feature `f` equals `v`, in the
    /// original order. The schema (value sets, bounds) is inherited from
    /// the parent; the result may be empty.
    pub fn partition(&self, f: usize, v: &FeatureValue) -> Dataset {
        assert!(f < self.arity(), "feature index {f} out of range");
        let instances: Vec<Pattern> = self
            .instances
            .iter()
            .filter(|inst| inst.value(f) == v)
            .cloned()
            .collect();
        let categories = instances
            .iter()
            .map(|p| p.category().unwrap().to_string())
            .collect();
        Dataset {
            schema: self.schema.clone(),
            instances,
            categories,
        }
    }
}

/// Parses an instance file. `declared_kinds` (e.g. from a CLI flag) takes
/// precedence over a `#kinds:` header; with neither, all columns are
/// symbolic.
pub fn parse_dataset(text: &str, declared_kinds: Option<&[FeatureKind]>) -> Result<Dataset, DataError> {
    let mut header_kinds: Option<Vec<FeatureKind>> = None;
    let mut names: Option<(usize, Vec<Option<String>>)> = None;
    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(decl) = comment.strip_prefix("kinds:") {
                if header_kinds.is_none() {
                    header_kinds = Some(parse_kinds(decl)?);
                }
            } else if let Some(decl) = comment.strip_prefix("names:") {
                if names.is_none() {
                    let parsed = decl
                        .split(',')
                        .map(|n| {
                            let n = n.trim();
                            if n.is_empty() {
                                None
                            } else {
                                Some(n.to_string())
                            }
                        })
                        .collect();
                    names = Some((line, parsed));
                }
            }
            continue;
        }
        let fields = raw.split(',').map(|s| s.trim().to_string()).collect();
        rows.push((line, fields));
    }

    if rows.is_empty() {
        return Err(DataError::EmptyDataset);
    }

    let kinds: Vec<FeatureKind> = match (declared_kinds, header_kinds) {
        (Some(decl), _) => decl.to_vec(),
        (None, Some(header)) => header,
        (None, None) => vec![FeatureKind::Symbolic; rows[0].1.len() - 1],
    };

    let mut instances = Vec::with_capacity(rows.len());
    for (line, fields) in rows {
        if fields.len() != kinds.len() + 1 {
            return Err(DataError::ArityMismatch {
                line,
                expected: kinds.len() + 1,
                found: fields.len(),
            });
        }
        let category = fields.last().unwrap().clone();
        if category.is_empty() {
            return Err(DataError::MissingCategory { line });
        }
        let values = fields[..fields.len() - 1]
            .iter()
            .enumerate()
            .map(|(f, field)| FeatureValue::parse_field(field, kinds[f], line))
            .collect::<Result<Vec<_>, _>>()?;
        instances.push(Pattern::with_category(values, category));
    }

    if let Some((line, parsed)) = &names {
        if parsed.len() != kinds.len() {
            return Err(DataError::BadHeader {
                line: *line,
                detail: format!(
                    "names header lists {} features, data has {}",
                    parsed.len(),
                    kinds.len()
                ),
            });
        }
    }

    Dataset::from_patterns(&kinds, names.as_ref().map(|(_, n)| n.as_slice()), instances)
}

/// Renders a dataset in the instance-file format. `parse_dataset` of the
/// result reproduces the dataset exactly, provided values contain no commas,
/// do not equal the missing marker and carry no surrounding whitespace.
pub fn serialize_dataset(dataset: &Dataset) -> String {
    let mut out = String::new();
    let kinds = dataset.schema().kinds();
    if kinds.iter().any(|&k| k != FeatureKind::Symbolic) {
        out.push_str("#kinds:");
        out.push_str(
            &kinds
                .iter()
                .map(|k| k.token())
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
    }
    if dataset.schema().has_names() {
        out.push_str("#names:");
        let names: Vec<&str> = dataset
            .schema()
            .features()
            .iter()
            .map(|fi| fi.name().unwrap_or(""))
            .collect();
        out.push_str(&names.join(","));
        out.push('\n');
    }
    for inst in dataset.instances() {
        let mut fields: Vec<String> = inst.values().iter().map(|v| v.to_string()).collect();
        fields.push(inst.category().unwrap().to_string());
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}
