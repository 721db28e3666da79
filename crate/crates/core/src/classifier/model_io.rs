//! Binary model container.
//!
//! Layout: magic `MBLB`, a u16 format version, the payload (config, schema,
//! weights, value-difference tables, instances) and a trailing FNV-1a 64-bit
//! checksum over everything before it. All integers are little-endian;
//! strings are u32-length-prefixed UTF-8. Value sets and numeric bounds are
//! not stored: the schema recomputes them from the stored instances, which
//! reproduces them exactly.

use std::collections::BTreeMap;
use std::path::Path;

use crate::data::{Dataset, FeatureKind, FeatureValue, Pattern, TagSet};
use crate::weighting::WeightVector;

use super::metrics::{VdmEntry, VdmTable};
use super::{InstanceBase, MetricChoice, ModelError, Weighting};

const MAGIC: &[u8; 4] = b"MBLB";
const VERSION: u16 = 1;

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn corrupt(detail: impl Into<String>) -> ModelError {
    ModelError::CorruptModel {
        detail: detail.into(),
    }
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new() -> Writer {
        Writer { buf: Vec::new() }
    }

    fn u8(&mut self, x: u8) {
        self.buf.push(x);
    }

    fn u16(&mut self, x: u16) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }

    fn u32(&mut self, x: u32) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }

    fn u64(&mut self, x: u64) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }

    fn f64(&mut self, x: f64) {
        self.u64(x.to_bits());
    }

    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }

    fn value(&mut self, v: &FeatureValue) {
        match v {
            FeatureValue::Missing => self.u8(0),
            FeatureValue::Symbolic(s) => {
                self.u8(1);
                self.str(s);
            }
            FeatureValue::Numeric(x) => {
                self.u8(2);
                self.f64(*x);
            }
            FeatureValue::TagSet(t) => {
                self.u8(3);
                self.u32(t.len() as u32);
                for tag in t.tags() {
                    self.str(tag);
                }
            }
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        if self.pos + n > self.bytes.len() {
            return Err(corrupt("unexpected end of model data"));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, ModelError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, ModelError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, ModelError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, ModelError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, ModelError> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn str(&mut self) -> Result<String, ModelError> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| corrupt("invalid UTF-8 in string"))
    }

    fn value(&mut self) -> Result<FeatureValue, ModelError> {
        match self.u8()? {
            0 => Ok(FeatureValue::Missing),
            1 => Ok(FeatureValue::Symbolic(self.str()?)),
            2 => {
                let x = self.f64()?;
                if !x.is_finite() {
                    return Err(corrupt("non-finite numeric value"));
                }
                Ok(FeatureValue::Numeric(x))
            }
            3 => {
                let len = self.u32()? as usize;
                let mut tags = Vec::with_capacity(len.min(1024));
                for _ in 0..len {
                    tags.push(self.str()?);
                }
                TagSet::new(tags)
                    .map(FeatureValue::TagSet)
                    .map_err(|_| corrupt("empty tag set"))
            }
            tag => Err(corrupt(format!("unknown value tag {tag}"))),
        }
    }
}

impl InstanceBase {
    /// Serializes the base into the binary container.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.buf.extend_from_slice(MAGIC);
        w.u16(VERSION);

        let n = self.arity();
        w.u8(match self.weighting() {
            Weighting::None => 0,
            Weighting::InformationGain => 1,
        });
        w.u32(self.default_k() as u32);
        w.u32(n as u32);
        for &m in self.metrics() {
            w.u8(match m {
                MetricChoice::Overlap => 0,
                MetricChoice::Numeric => 1,
                MetricChoice::Vdm => 2,
                MetricChoice::TagSet => 3,
            });
        }
        for fi in self.schema().features() {
            w.u8(match fi.kind() {
                FeatureKind::Symbolic => 0,
                FeatureKind::Numeric => 1,
                FeatureKind::TagSet => 2,
            });
            match fi.name() {
                None => w.u8(0),
                Some(name) => {
                    w.u8(1);
                    w.str(name);
                }
            }
        }
        for &g in self.weights().gains() {
            w.f64(g);
        }
        w.u32(self.categories().len() as u32);
        for c in self.categories() {
            w.str(c);
        }
        for table in self.vdm_tables() {
            match table {
                None => w.u8(0),
                Some(t) => {
                    w.u8(1);
                    w.u32(t.entries().len() as u32);
                    for (value, entry) in t.entries() {
                        w.value(value);
                        for &c in entry.counts() {
                            w.u64(c);
                        }
                    }
                }
            }
        }
        w.u32(self.instance_count() as u32);
        for i in 0..self.instance_count() {
            let inst = self.dataset().instance(i);
            for v in inst.values() {
                w.value(v);
            }
            let cat = inst.category().unwrap();
            let code = self
                .categories()
                .binary_search_by(|c| c.as_str().cmp(cat))
                .unwrap() as u32;
            w.u32(code);
        }

        let checksum = fnv1a64(&w.buf);
        w.u64(checksum);
        w.buf
    }

    /// Deserializes a base, verifying magic, version and checksum. Loaded
    /// bases classify exactly as the saved one: weights and count tables are
    /// taken from the file, not recomputed.
    pub fn from_bytes(bytes: &[u8]) -> Result<InstanceBase, ModelError> {
        if bytes.len() < MAGIC.len() + 2 + 8 {
            return Err(corrupt("file too short"));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 8);
        let stored = u64::from_le_bytes(tail.try_into().unwrap());
        if fnv1a64(body) != stored {
            return Err(corrupt("checksum mismatch"));
        }
        let mut r = Reader {
            bytes: body,
            pos: 0,
        };
        if r.take(4)? != MAGIC {
            return Err(corrupt("bad magic bytes"));
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(corrupt(format!(
                "unsupported model version {version} (expected {VERSION})"
            )));
        }

        let weighting = match r.u8()? {
            0 => Weighting::None,
            1 => Weighting::InformationGain,
            x => return Err(corrupt(format!("unknown weighting code {x}"))),
        };
        let default_k = r.u32()? as usize;
        if default_k == 0 {
            return Err(corrupt("k must be at least 1"));
        }
        let n = r.u32()? as usize;
        let mut metrics = Vec::with_capacity(n);
        for _ in 0..n {
            metrics.push(match r.u8()? {
                0 => MetricChoice::Overlap,
                1 => MetricChoice::Numeric,
                2 => MetricChoice::Vdm,
                3 => MetricChoice::TagSet,
                x => return Err(corrupt(format!("unknown metric code {x}"))),
            });
        }
        let mut kinds = Vec::with_capacity(n);
        let mut names: Vec<Option<String>> = Vec::with_capacity(n);
        for _ in 0..n {
            kinds.push(match r.u8()? {
                0 => FeatureKind::Symbolic,
                1 => FeatureKind::Numeric,
                2 => FeatureKind::TagSet,
                x => return Err(corrupt(format!("unknown kind code {x}"))),
            });
            names.push(match r.u8()? {
                0 => None,
                1 => Some(r.str()?),
                x => return Err(corrupt(format!("unknown name flag {x}"))),
            });
        }
        let mut gains = Vec::with_capacity(n);
        for _ in 0..n {
            let g = r.f64()?;
            if !g.is_finite() || g < 0.0 {
                return Err(corrupt("weights must be finite and nonnegative"));
            }
            gains.push(g);
        }
        let cat_count = r.u32()? as usize;
        let mut categories = Vec::with_capacity(cat_count.min(4096));
        for _ in 0..cat_count {
            categories.push(r.str()?);
        }
        if categories.windows(2).any(|w| w[0] >= w[1]) {
            return Err(corrupt("category inventory must be sorted and unique"));
        }
        let mut vdm_tables: Vec<Option<VdmTable>> = Vec::with_capacity(n);
        for _ in 0..n {
            match r.u8()? {
                0 => vdm_tables.push(None),
                1 => {
                    let entries_len = r.u32()? as usize;
                    let mut entries = BTreeMap::new();
                    for _ in 0..entries_len {
                        let value = r.value()?;
                        let mut counts = Vec::with_capacity(cat_count);
                        for _ in 0..cat_count {
                            counts.push(r.u64()?);
                        }
                        entries.insert(value, VdmEntry::new(counts));
                    }
                    vdm_tables.push(Some(VdmTable::from_entries(entries)));
                }
                x => return Err(corrupt(format!("unknown table flag {x}"))),
            }
        }
        let instance_count = r.u32()? as usize;
        if instance_count == 0 {
            return Err(corrupt("model holds no instances"));
        }
        let mut instances = Vec::with_capacity(instance_count.min(1 << 20));
        for _ in 0..instance_count {
            let mut values = Vec::with_capacity(n);
            for _ in 0..n {
                values.push(r.value()?);
            }
            let code = r.u32()? as usize;
            let category = categories
                .get(code)
                .ok_or_else(|| corrupt(format!("category code {code} out of range")))?;
            instances.push(Pattern::with_category(values, category.clone()));
        }
        if r.pos != body.len() {
            return Err(corrupt("trailing bytes after instance data"));
        }

        let dataset = Dataset::from_patterns(&kinds, Some(&names), instances)
            .map_err(|e| corrupt(format!("invalid stored instances: {e}")))?;
        let recomputed: Vec<String> = dataset.categories().iter().cloned().collect();
        if recomputed != categories {
            return Err(corrupt("category inventory does not match instances"));
        }
        InstanceBase::assemble(
            dataset,
            weighting,
            metrics,
            WeightVector::from_gains(gains),
            vdm_tables,
            default_k,
        )
        .map_err(|e| corrupt(format!("inconsistent model: {e}")))
    }

    pub fn save_file(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load_file(path: impl AsRef<Path>) -> Result<InstanceBase, ModelError> {
        let bytes = std::fs::read(path)?;
        InstanceBase::from_bytes(&bytes)
    }
}
