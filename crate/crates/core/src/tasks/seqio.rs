//! Text formats for sequences and lexicons.
//!
//! Sequence file: one sequence per line, items separated by whitespace.
//! `man/noun` attaches a category annotation to an item (the split is on
//! the last `/`), and a leading `-` marks that a boundary precedes the
//! item, so `ma -gnet` puts one boundary before `gnet`. Annotations are
//! all-or-nothing per line. `#` lines are comments, blank lines are
//! skipped.
//!
//! Lexicon file: one word per line, `word<TAB>tag:count,tag:count` with
//! tags sorted.

use std::collections::BTreeMap;

use crate::data::TagSet;

use super::{Lexicon, SymbolSequence, TaggedCorpus, TaskError};

/// Parses one sequence line; `None` for blank and comment lines.
fn parse_sequence_line(raw: &str, line: usize) -> Result<Option<SymbolSequence>, TaskError> {
    let trimmed = raw.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let mut items = Vec::new();
    let mut tags: Vec<Option<String>> = Vec::new();
    let mut boundaries = Vec::new();
    for token in trimmed.split_whitespace() {
        // A lone "-" is an ordinary item; a longer "-x" flags a boundary.
        let (boundary, token) = match token.strip_prefix('-') {
            Some(rest) if !rest.is_empty() => (true, rest),
            _ => (false, token),
        };
        let (item, tag) = match token.rsplit_once('/') {
            Some((item, tag)) if !item.is_empty() => (item, Some(tag.to_string())),
            _ => (token, None),
        };
        items.push(item.to_string());
        tags.push(tag);
        boundaries.push(boundary);
    }
    let annotated = tags.iter().filter(|t| t.is_some()).count();
    let seq = SymbolSequence::new(items);
    let seq = if annotated == tags.len() {
        seq.with_tags(tags.into_iter().map(Option::unwrap))?
    } else if annotated == 0 {
        seq
    } else {
        return Err(TaskError::BadLine {
            line,
            detail: format!("{annotated} of {} items annotated; use all or none", tags.len()),
        });
    };
    Ok(Some(seq.with_boundaries(boundaries)?))
}

/// Parses a sequence file into one `SymbolSequence` per nonblank line.
pub fn parse_sequences(text: &str) -> Result<Vec<SymbolSequence>, TaskError> {
    let mut seqs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if let Some(seq) = parse_sequence_line(raw, i + 1)? {
            seqs.push(seq);
        }
    }
    Ok(seqs)
}

/// Parses a sequence file whose every item is tagged, as a corpus.
pub fn parse_tagged_corpus(text: &str) -> Result<TaggedCorpus, TaskError> {
    TaggedCorpus::new(parse_sequences(text)?)
}

/// Renders a lexicon as `word<TAB>tag:count,...` lines.
pub fn serialize_lexicon(lexicon: &Lexicon) -> String {
    let mut out = String::new();
    for (word, entry) in lexicon.entries() {
        let counts: Vec<String> = entry
            .counts()
            .iter()
            .map(|(tag, count)| format!("{tag}:{count}"))
            .collect();
        out.push_str(&format!("{word}\t{}\n", counts.join(",")));
    }
    out
}

/// Parses the lexicon format written by [`serialize_lexicon`].
pub fn parse_lexicon(text: &str) -> Result<Lexicon, TaskError> {
    let mut counts: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (word, rest) = trimmed.split_once('\t').ok_or_else(|| TaskError::BadLine {
            line,
            detail: "expected word<TAB>tag:count,...".to_string(),
        })?;
        let mut tag_counts = BTreeMap::new();
        for pair in rest.split(',') {
            let (tag, count) = pair.split_once(':').ok_or_else(|| TaskError::BadLine {
                line,
                detail: format!("bad tag:count pair {pair:?}"),
            })?;
            let count: u64 = count.trim().parse().map_err(|_| TaskError::BadLine {
                line,
                detail: format!("bad count in {pair:?}"),
            })?;
            tag_counts.insert(tag.trim().to_string(), count);
        }
        if tag_counts.is_empty() {
            return Err(TaskError::BadLine {
                line,
                detail: "word has no tags".to_string(),
            });
        }
        counts.insert(word.to_string(), tag_counts);
    }
    Lexicon::from_counts(counts)
}

/// Parses a comma-separated tag list into a fallback category; blank
/// entries are dropped and at least one tag must remain.
pub fn parse_tag_list(list: &str) -> Result<TagSet, TaskError> {
    let tags: Vec<String> = list
        .split(',')
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .collect();
    Ok(TagSet::new(tags)?)
}
