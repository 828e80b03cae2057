//! Text ingestion: chunking, frequency counting, and annotated morpheme
//! datasets.
//!
//! A *chunk* is the tokenizer's unit of work: optional leading whitespace,
//! a word body, and any trailing special characters. `"Hej med dig!"`
//! chunks as `["Hej", " med", " dig!"]`; concatenating the raws of all
//! chunks reproduces the document byte for byte.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::escape::{escape_field, unescape_field};

/// One tokenization unit. `raw` is the exact consumed span; `body` is `raw`
/// minus the leading whitespace run (and minus a document-final trailing
/// whitespace run, which only the last chunk of a document can carry).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    raw: String,
    body_start: usize,
    body_end: usize,
}

impl Chunk {
    /// Builds a chunk from a raw span, provided the span is a single chunk
    /// (at most one interior word). Returns `None` for spans that would
    /// chunk into several pieces.
    pub fn from_raw(raw: &str) -> Option<Chunk> {
        let mut chunks = chunk_text(raw);
        if chunks.len() == 1 {
            chunks.pop()
        } else {
            None
        }
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    /// The word body plus trailing specials; empty only for a
    /// whitespace-only document's single chunk.
    pub fn body(&self) -> &str {
        &self.raw[self.body_start..self.body_end]
    }

    pub fn has_leading_space(&self) -> bool {
        self.raw.chars().next().is_some_and(char::is_whitespace)
    }

    pub fn leading_whitespace(&self) -> &str {
        &self.raw[..self.body_start]
    }

    /// Non-empty only on a document-final chunk that absorbed a trailing
    /// whitespace run.
    pub fn trailing_whitespace(&self) -> &str {
        &self.raw[self.body_end..]
    }
}

/// Splits a document into chunks. Total on all inputs: every maximal
/// whitespace run attaches as leading whitespace of the following chunk; a
/// document-final whitespace run with no following word attaches to the
/// preceding chunk's raw; a whitespace-only document yields one body-less
/// chunk so the partition stays lossless.
pub fn chunk_text(document: &str) -> Vec<Chunk> {
    let mut chunks: Vec<Chunk> = Vec::new();
    let mut chunk_start = 0usize; // start of the pending chunk (incl. leading ws)
    let mut body_start = 0usize;
    let mut in_word = false;

    for (i, c) in document.char_indices() {
        if c.is_whitespace() {
            if in_word {
                chunks.push(Chunk {
                    raw: document[chunk_start..i].to_string(),
                    body_start: body_start - chunk_start,
                    body_end: i - chunk_start,
                });
                chunk_start = i;
                in_word = false;
            }
        } else if !in_word {
            body_start = i;
            in_word = true;
        }
    }

    let tail = &document[chunk_start..];
    if in_word {
        chunks.push(Chunk {
            raw: tail.to_string(),
            body_start: body_start - chunk_start,
            body_end: document.len() - chunk_start,
        });
    } else if !tail.is_empty() {
        match chunks.last_mut() {
            Some(last) => last.raw.push_str(tail),
            None => chunks.push(Chunk {
                raw: tail.to_string(),
                body_start: 0,
                body_end: 0,
            }),
        }
    }
    chunks
}

/// Chunk-raw frequency counts with a deterministic iteration order:
/// count descending, then raw ascending by code point.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    entries: BTreeMap<String, u64>,
    total: u64,
}

impl FrequencyTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, raw: &str, n: u64) {
        if n == 0 {
            return;
        }
        *self.entries.entry(raw.to_string()).or_insert(0) += n;
        self.total += n;
    }

    pub fn count(&self, raw: &str) -> u64 {
        self.entries.get(raw).copied().unwrap_or(0)
    }

    /// Sum of all counts.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct chunk raws.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Key-ordered iteration (ascending raw), independent of counts.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// All entries under the deterministic order.
    pub fn ordered_entries(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<(&str, u64)> = self.iter().collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    /// First `k` entries under the deterministic order.
    pub fn top_k(&self, k: usize) -> Vec<(&str, u64)> {
        let mut v = self.ordered_entries();
        v.truncate(k);
        v
    }

    /// Frequency-list file: `count<TAB>chunk-raw` per line under the
    /// deterministic order, raws escaped.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (raw, count) in self.ordered_entries() {
            out.push_str(&count.to_string());
            out.push('\t');
            out.push_str(&escape_field(raw));
            out.push('\n');
        }
        out
    }

    pub fn parse_tsv(source: &str) -> Result<Self, FreqListError> {
        let mut table = Self::new();
        for (idx, line) in source.lines().enumerate() {
            let line_no = idx + 1;
            if line.is_empty() {
                continue;
            }
            let (count, raw) = line
                .split_once('\t')
                .ok_or(FreqListError::MissingTab { line: line_no })?;
            let count: u64 = count
                .parse()
                .map_err(|_| FreqListError::BadCount { line: line_no })?;
            let raw = unescape_field(raw).map_err(|_| FreqListError::BadEscape { line: line_no })?;
            if table.entries.contains_key(&raw) {
                return Err(FreqListError::DuplicateEntry { line: line_no });
            }
            table.add(&raw, count);
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FreqListError {
    MissingTab { line: usize },
    BadCount { line: usize },
    BadEscape { line: usize },
    DuplicateEntry { line: usize },
}

impl fmt::Display for FreqListError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FreqListError::MissingTab { line } => write!(f, "line {line}: expected count<TAB>raw"),
            FreqListError::BadCount { line } => write!(f, "line {line}: count is not an integer"),
            FreqListError::BadEscape { line } => write!(f, "line {line}: invalid escape in raw"),
            FreqListError::DuplicateEntry { line } => write!(f, "line {line}: duplicate chunk raw"),
        }
    }
}

impl core::error::Error for FreqListError {}

/// Counts a chunk stream, keyed on `Chunk.raw`. Memory is proportional to
/// the number of distinct raws, not the stream length.
pub fn count_frequencies<I: IntoIterator<Item = Chunk>>(chunks: I) -> FrequencyTable {
    let mut table = FrequencyTable::new();
    for c in chunks {
        table.add(c.raw(), 1);
    }
    table
}

/// Word-level morphological category of an annotated word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MorphCategory {
    Root,
    Compound,
    Linking,
    Prefix,
    Suffix,
    Inflection,
}

impl MorphCategory {
    pub const ALL: [MorphCategory; 6] = [
        MorphCategory::Root,
        MorphCategory::Compound,
        MorphCategory::Linking,
        MorphCategory::Prefix,
        MorphCategory::Suffix,
        MorphCategory::Inflection,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MorphCategory::Root => "Root",
            MorphCategory::Compound => "Compound",
            MorphCategory::Linking => "Linking",
            MorphCategory::Prefix => "Prefix",
            MorphCategory::Suffix => "Suffix",
            MorphCategory::Inflection => "Inflection",
        }
    }

    /// Accepts the six canonical names plus the long forms "Root Morpheme"
    /// and "Linking Morpheme".
    pub fn parse(s: &str) -> Option<MorphCategory> {
        match s {
            "Root" | "Root Morpheme" => Some(MorphCategory::Root),
            "Compound" => Some(MorphCategory::Compound),
            "Linking" | "Linking Morpheme" => Some(MorphCategory::Linking),
            "Prefix" => Some(MorphCategory::Prefix),
            "Suffix" => Some(MorphCategory::Suffix),
            "Inflection" => Some(MorphCategory::Inflection),
            _ => None,
        }
    }
}

impl fmt::Display for MorphCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-segment tag inside an annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SegmentTag {
    Root,
    Link,
    Pref,
    Suff,
    Infl,
}

impl SegmentTag {
    pub fn name(self) -> &'static str {
        match self {
            SegmentTag::Root => "Root",
            SegmentTag::Link => "Link",
            SegmentTag::Pref => "Pref",
            SegmentTag::Suff => "Suff",
            SegmentTag::Infl => "Infl",
        }
    }

    pub fn parse(s: &str) -> Option<SegmentTag> {
        match s {
            "Root" => Some(SegmentTag::Root),
            "Link" => Some(SegmentTag::Link),
            "Pref" => Some(SegmentTag::Pref),
            "Suff" => Some(SegmentTag::Suff),
            "Infl" => Some(SegmentTag::Infl),
            _ => None,
        }
    }
}

impl fmt::Display for SegmentTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A gold-annotated word: ordered tagged segments plus one word-level
/// category. Segment surfaces concatenate to the word case-insensitively
/// ("Lånte" may be annotated "lån te").
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedWord {
    pub word: String,
    pub segments: Vec<(String, SegmentTag)>,
    pub category: MorphCategory,
}

impl AnnotatedWord {
    pub fn new(
        word: String,
        segments: Vec<(String, SegmentTag)>,
        category: MorphCategory,
    ) -> Result<Self, AnnotationErrorKind> {
        if word.is_empty() || word.chars().any(char::is_whitespace) {
            return Err(AnnotationErrorKind::BadWord(word));
        }
        if segments.is_empty() {
            return Err(AnnotationErrorKind::EmptySegments);
        }
        for (surface, _) in &segments {
            if surface.is_empty() || surface.chars().any(char::is_whitespace) {
                return Err(AnnotationErrorKind::BadSurface(surface.clone()));
            }
        }
        let joined: String = segments.iter().map(|(s, _)| s.as_str()).collect();
        if fold_case(&joined) != fold_case(&word) {
            return Err(AnnotationErrorKind::ConcatenationMismatch { word, joined });
        }
        Ok(Self {
            word,
            segments,
            category,
        })
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.segments.iter().map(|(s, _)| s.as_str())
    }
}

/// Case folding used by every case-insensitive comparison in the toolkit.
pub fn fold_case(s: &str) -> String {
    s.chars().flat_map(char::to_lowercase).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationError {
    pub line: usize,
    pub kind: AnnotationErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnnotationErrorKind {
    MissingField(&'static str),
    UnknownCategory(String),
    UnknownTag(String),
    BadSegmentSyntax(String),
    ConcatenationMismatch { word: String, joined: String },
    BadWord(String),
    BadSurface(String),
    EmptySegments,
}

impl fmt::Display for AnnotationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.kind)
    }
}

impl fmt::Display for AnnotationErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnnotationErrorKind::MissingField(name) => write!(f, "missing {name} field"),
            AnnotationErrorKind::UnknownCategory(s) => write!(f, "unknown category {s:?}"),
            AnnotationErrorKind::UnknownTag(s) => write!(f, "unknown segment tag {s:?}"),
            AnnotationErrorKind::BadSegmentSyntax(s) => {
                write!(f, "segment {s:?} is not surface[Tag]")
            }
            AnnotationErrorKind::ConcatenationMismatch { word, joined } => {
                write!(f, "segments join to {joined:?}, not to the word {word:?}")
            }
            AnnotationErrorKind::BadWord(s) => write!(f, "word {s:?} is empty or has whitespace"),
            AnnotationErrorKind::BadSurface(s) => {
                write!(f, "surface {s:?} is empty or has whitespace")
            }
            AnnotationErrorKind::EmptySegments => f.write_str("no segments"),
        }
    }
}

impl core::error::Error for AnnotationError {}

/// Parses an annotation file: one record per line,
/// `word<TAB>category<TAB>surface[Tag] surface[Tag] ...`; `#` lines and
/// blank lines are ignored. All-or-nothing: the first malformed line fails
/// the whole parse with its line number.
pub fn parse_annotations(source: &str) -> Result<Vec<AnnotatedWord>, AnnotationError> {
    let mut out = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.push(parse_annotation_line(trimmed).map_err(|kind| AnnotationError {
            line: line_no,
            kind,
        })?);
    }
    Ok(out)
}

fn parse_annotation_line(line: &str) -> Result<AnnotatedWord, AnnotationErrorKind> {
    let mut fields = line.split('\t');
    let word = fields
        .next()
        .filter(|s| !s.is_empty())
        .ok_or(AnnotationErrorKind::MissingField("word"))?;
    let category = fields
        .next()
        .ok_or(AnnotationErrorKind::MissingField("category"))?;
    let segments = fields
        .next()
        .ok_or(AnnotationErrorKind::MissingField("segments"))?;
    let category = MorphCategory::parse(category)
        .ok_or_else(|| AnnotationErrorKind::UnknownCategory(category.to_string()))?;
    let mut parsed = Vec::new();
    for item in segments.split(' ').filter(|s| !s.is_empty()) {
        let (surface, tag) = item
            .strip_suffix(']')
            .and_then(|s| s.split_once('['))
            .ok_or_else(|| AnnotationErrorKind::BadSegmentSyntax(item.to_string()))?;
        let tag = SegmentTag::parse(tag)
            .ok_or_else(|| AnnotationErrorKind::UnknownTag(tag.to_string()))?;
        parsed.push((surface.to_string(), tag));
    }
    AnnotatedWord::new(word.to_string(), parsed, category)
}

/// Inverse of [`parse_annotations`] on valid lists.
pub fn serialize_annotations(words: &[AnnotatedWord]) -> String {
    let mut out = String::new();
    for w in words {
        out.push_str(&w.word);
        out.push('\t');
        out.push_str(w.category.name());
        out.push('\t');
        for (i, (surface, tag)) in w.segments.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(surface);
            out.push('[');
            out.push_str(tag.name());
            out.push(']');
        }
        out.push('\n');
    }
    out
}
