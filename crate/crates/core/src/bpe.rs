//! Byte-pair encoding over marked chunks.
//!
//! Symbol ids 0..=255 are the byte-fallback symbols, always present so
//! encoding is total. Id 256 is always the whitespace marker, so a space
//! encodes losslessly even when training never saw one. Remaining text
//! symbols follow: every other code point seen in training (in
//! deterministic corpus order), then one symbol per merge.
//! Training counts adjacent pairs position-wise (overlapping occurrences
//! count), weighted by chunk frequency; the most frequent pair wins, ties
//! going to the pair first seen earliest. Rewrites are left to right and
//! never cross chunk boundaries. Byte symbols never participate in merges,
//! and a merge whose concatenated result would duplicate an existing text
//! surface is skipped, so text surfaces stay unique within a model and a
//! merge file reconstructs the model exactly.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;

use crate::corpus::{Chunk, FrequencyTable};
use crate::escape::{escape_field, unescape_field};
use crate::symbol::{byte_surface, mark_raw, MarkedCp, SurfaceDecoder, MARKER};

pub const BYTE_SYMBOL_COUNT: usize = 256;

/// A trained byte-pair encoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpeModel {
    surfaces: Vec<String>,
    n_base: usize,
    merges: Vec<(u32, u32, u32)>,
    rank: BTreeMap<(u32, u32), (u32, u32)>,
    char_ids: BTreeMap<char, u32>,
}

impl BpeModel {
    /// Base inventory: the 256 byte symbols plus the training code points.
    pub fn base_symbols(&self) -> &[String] {
        &self.surfaces[..self.n_base]
    }

    /// Every symbol surface in creation order (base, then merge results).
    pub fn surfaces(&self) -> &[String] {
        &self.surfaces
    }

    pub fn surface(&self, id: u32) -> Option<&str> {
        self.surfaces.get(id as usize).map(String::as_str)
    }

    pub fn is_byte_symbol(&self, id: u32) -> bool {
        (id as usize) < BYTE_SYMBOL_COUNT
    }

    pub fn vocab_size(&self) -> usize {
        self.surfaces.len()
    }

    pub fn merge_count(&self) -> usize {
        self.merges.len()
    }

    /// Merges as (left, right) surfaces in training order.
    pub fn merge_surfaces(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.merges
            .iter()
            .map(|(x, y, _)| (self.surfaces[*x as usize].as_str(), self.surfaces[*y as usize].as_str()))
    }

    /// Rebuilds a model from its base inventory and merge list.
    pub fn from_parts(
        base_symbols: Vec<String>,
        merge_pairs: &[(String, String)],
    ) -> Result<BpeModel, BpeError> {
        if base_symbols.len() < BYTE_SYMBOL_COUNT {
            return Err(BpeError::InvalidBase("missing byte symbols"));
        }
        for (i, s) in base_symbols.iter().take(BYTE_SYMBOL_COUNT).enumerate() {
            if *s != byte_surface(i as u8) {
                return Err(BpeError::InvalidBase("byte symbols must come first, in order"));
            }
        }
        if base_symbols.get(BYTE_SYMBOL_COUNT).map(String::as_str)
            != Some(String::from(MARKER).as_str())
        {
            return Err(BpeError::InvalidBase(
                "the whitespace marker must be the first text symbol",
            ));
        }
        let mut surfaces = base_symbols;
        let mut text_index: BTreeMap<String, u32> = BTreeMap::new();
        let mut char_ids = BTreeMap::new();
        for (i, s) in surfaces.iter().enumerate().skip(BYTE_SYMBOL_COUNT) {
            if text_index.insert(s.clone(), i as u32).is_some() {
                return Err(BpeError::DuplicateSymbol(s.clone()));
            }
            let mut chars = s.chars();
            if let (Some(c), None) = (chars.next(), chars.next()) {
                char_ids.insert(c, i as u32);
            }
        }
        let n_base = surfaces.len();
        let mut merges = Vec::with_capacity(merge_pairs.len());
        let mut rank = BTreeMap::new();
        for (order, (left, right)) in merge_pairs.iter().enumerate() {
            let x = *text_index
                .get(left)
                .ok_or_else(|| BpeError::UnknownSymbol(left.clone()))?;
            let y = *text_index
                .get(right)
                .ok_or_else(|| BpeError::UnknownSymbol(right.clone()))?;
            let mut result = String::with_capacity(left.len() + right.len());
            result.push_str(left);
            result.push_str(right);
            if text_index.contains_key(&result) {
                return Err(BpeError::DuplicateSymbol(result));
            }
            let z = surfaces.len() as u32;
            text_index.insert(result.clone(), z);
            surfaces.push(result);
            merges.push((x, y, z));
            rank.insert((x, y), (order as u32, z));
        }
        Ok(BpeModel {
            surfaces,
            n_base,
            merges,
            rank,
            char_ids,
        })
    }

    /// Encodes one chunk to symbol ids: marked code points, then merges
    /// applied in training order (equivalently, best-ranked pair first).
    pub fn encode_ids(&self, chunk: &Chunk) -> Vec<u32> {
        let mut seq: Vec<u32> = Vec::new();
        for mc in mark_raw(chunk.raw()) {
            match mc {
                MarkedCp::Text(c) => match self.char_ids.get(&c) {
                    Some(&id) => seq.push(id),
                    None => {
                        let mut buf = [0u8; 4];
                        for b in c.encode_utf8(&mut buf).bytes() {
                            seq.push(b as u32);
                        }
                    }
                },
                MarkedCp::Byte(b) => seq.push(b as u32),
            }
        }
        loop {
            let mut best: Option<(u32, (u32, u32), u32)> = None;
            for i in 0..seq.len().saturating_sub(1) {
                if let Some(&(order, z)) = self.rank.get(&(seq[i], seq[i + 1])) {
                    if best.map_or(true, |(o, _, _)| order < o) {
                        best = Some((order, (seq[i], seq[i + 1]), z));
                    }
                }
            }
            let Some((_, (x, y), z)) = best else { break };
            seq = rewrite(&seq, x, y, z);
        }
        seq
    }

    /// Decodes a symbol id sequence back to chunk text.
    pub fn decode_ids(&self, ids: &[u32]) -> Result<String, BpeError> {
        let mut decoder = SurfaceDecoder::new();
        for &id in ids {
            if self.is_byte_symbol(id) {
                decoder.push_byte(id as u8);
            } else {
                let surface = self.surface(id).ok_or(BpeError::BadId(id))?;
                decoder.push_text(surface);
            }
        }
        Ok(decoder.finish())
    }
}

/// Encodes one chunk to symbol surfaces.
pub fn encode_bpe(model: &BpeModel, chunk: &Chunk) -> Vec<String> {
    model
        .encode_ids(chunk)
        .iter()
        .map(|&id| model.surfaces[id as usize].clone())
        .collect()
}

/// Left-to-right replacement of every (x, y) adjacency by z.
fn rewrite(seq: &[u32], x: u32, y: u32, z: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(seq.len());
    let mut i = 0;
    while i < seq.len() {
        if seq[i] == x && i + 1 < seq.len() && seq[i + 1] == y {
            out.push(z);
            i += 2;
        } else {
            out.push(seq[i]);
            i += 1;
        }
    }
    out
}

/// Trains until the vocabulary reaches `vocab_size` symbols, or merges run
/// out (the model then reports the size actually achieved).
pub fn train_bpe(counts: &FrequencyTable, vocab_size: usize) -> Result<BpeModel, BpeError> {
    let mut trainer = BpeTrainer::new(counts)?;
    let base = trainer.surfaces.len();
    if vocab_size < base {
        return Err(BpeError::VocabTooSmall {
            base,
            requested: vocab_size,
        });
    }
    while trainer.surfaces.len() < vocab_size {
        if trainer.step().is_none() {
            break;
        }
    }
    Ok(trainer.finish())
}

/// Trains until the model contributes exactly `budget` text surfaces that
/// are not already in `existing`, or merges run out. Byte symbols never
/// count (a composed vocabulary always has them already); this lets that
/// vocabulary hit an exact total.
pub(crate) fn train_bpe_for_new_surfaces(
    counts: &FrequencyTable,
    existing: &BTreeSet<String>,
    budget: usize,
) -> Result<BpeModel, BpeError> {
    let mut trainer = BpeTrainer::new(counts)?;
    let mut new_surfaces = trainer
        .surfaces
        .iter()
        .enumerate()
        .filter(|&(i, s)| i >= BYTE_SYMBOL_COUNT && !existing.contains(s))
        .count();
    while new_surfaces < budget {
        match trainer.step() {
            Some(id) => {
                if !existing.contains(&trainer.surfaces[id as usize]) {
                    new_surfaces += 1;
                }
            }
            None => break,
        }
    }
    Ok(trainer.finish())
}

struct Word {
    seq: Vec<u32>,
    weight: u64,
}

struct BpeTrainer {
    surfaces: Vec<String>,
    text_index: BTreeMap<String, u32>,
    char_ids: BTreeMap<char, u32>,
    words: Vec<Word>,
    pair_counts: BTreeMap<(u32, u32), u64>,
    pair_words: BTreeMap<(u32, u32), BTreeSet<usize>>,
    first_seen: BTreeMap<(u32, u32), u64>,
    next_first_seen: u64,
    heap: BinaryHeap<(u64, Reverse<u64>, (u32, u32))>,
    skipped: BTreeSet<(u32, u32)>,
    merges: Vec<(u32, u32, u32)>,
}

impl BpeTrainer {
    fn new(counts: &FrequencyTable) -> Result<BpeTrainer, BpeError> {
        if counts.is_empty() {
            return Err(BpeError::EmptyCorpus);
        }
        let mut trainer = BpeTrainer {
            surfaces: (0..=255u8).map(byte_surface).collect(),
            text_index: BTreeMap::new(),
            char_ids: BTreeMap::new(),
            words: Vec::with_capacity(counts.len()),
            pair_counts: BTreeMap::new(),
            pair_words: BTreeMap::new(),
            first_seen: BTreeMap::new(),
            next_first_seen: 0,
            heap: BinaryHeap::new(),
            skipped: BTreeSet::new(),
            merges: Vec::new(),
        };
        let marker_id = trainer.surfaces.len() as u32;
        trainer.surfaces.push(String::from(MARKER));
        trainer.char_ids.insert(MARKER, marker_id);
        trainer.text_index.insert(String::from(MARKER), marker_id);
        for (raw, weight) in counts.ordered_entries() {
            let mut seq = Vec::new();
            for mc in mark_raw(raw) {
                match mc {
                    MarkedCp::Text(c) => {
                        let id = *trainer.char_ids.entry(c).or_insert_with(|| {
                            let id = trainer.surfaces.len() as u32;
                            trainer.surfaces.push(c.to_string());
                            id
                        });
                        if let Some(s) = trainer.surfaces.get(id as usize) {
                            trainer.text_index.entry(s.clone()).or_insert(id);
                        }
                        seq.push(id);
                    }
                    MarkedCp::Byte(b) => seq.push(b as u32),
                }
            }
            trainer.words.push(Word { seq, weight });
        }
        for w in 0..trainer.words.len() {
            trainer.add_word_pairs(w);
        }
        Ok(trainer)
    }

    fn is_countable(&self, x: u32, y: u32) -> bool {
        x as usize >= BYTE_SYMBOL_COUNT && y as usize >= BYTE_SYMBOL_COUNT
    }

    fn add_word_pairs(&mut self, w: usize) {
        let weight = self.words[w].weight;
        let mut touched = BTreeSet::new();
        let seq = &self.words[w].seq;
        for i in 0..seq.len().saturating_sub(1) {
            let (x, y) = (seq[i], seq[i + 1]);
            if !self.is_countable(x, y) {
                continue;
            }
            touched.insert((x, y));
        }
        let pairs: Vec<(u32, u32)> = touched.into_iter().collect();
        for pair in pairs {
            let occurrences = count_occurrences(&self.words[w].seq, pair);
            let entry = self.pair_counts.entry(pair).or_insert(0);
            *entry += occurrences * weight;
            let count = *entry;
            self.pair_words.entry(pair).or_default().insert(w);
            let next = self.next_first_seen;
            let fs = *self.first_seen.entry(pair).or_insert_with(|| next);
            if fs == next {
                self.next_first_seen += 1;
            }
            self.heap.push((count, Reverse(fs), pair));
        }
    }

    fn remove_word_pairs(&mut self, w: usize) {
        let weight = self.words[w].weight;
        let mut touched = BTreeSet::new();
        let seq = &self.words[w].seq;
        for i in 0..seq.len().saturating_sub(1) {
            let (x, y) = (seq[i], seq[i + 1]);
            if !self.is_countable(x, y) {
                continue;
            }
            touched.insert((x, y));
        }
        let pairs: Vec<(u32, u32)> = touched.into_iter().collect();
        for pair in pairs {
            let occurrences = count_occurrences(&self.words[w].seq, pair);
            let entry = self.pair_counts.get_mut(&pair).expect("counted pair");
            debug_assert!(*entry >= occurrences * weight);
            *entry -= occurrences * weight;
            if *entry == 0 {
                self.pair_counts.remove(&pair);
            }
            if let Some(set) = self.pair_words.get_mut(&pair) {
                set.remove(&w);
                if set.is_empty() {
                    self.pair_words.remove(&pair);
                }
            }
        }
    }

    /// Applies the next merge; None when no countable pair remains.
    fn step(&mut self) -> Option<u32> {
        loop {
            let (count, Reverse(fs), pair) = self.heap.pop()?;
            if self.skipped.contains(&pair) {
                continue;
            }
            let current = self.pair_counts.get(&pair).copied().unwrap_or(0);
            if current == 0 {
                continue;
            }
            if current != count {
                self.heap.push((current, Reverse(fs), pair));
                continue;
            }
            let (x, y) = pair;
            let mut result = String::new();
            result.push_str(&self.surfaces[x as usize]);
            result.push_str(&self.surfaces[y as usize]);
            if self.text_index.contains_key(&result) {
                // Result would collide with an existing text surface;
                // unique surfaces keep the merge file unambiguous.
                self.skipped.insert(pair);
                continue;
            }
            let z = self.surfaces.len() as u32;
            self.text_index.insert(result.clone(), z);
            self.surfaces.push(result);
            self.merges.push((x, y, z));
            let affected: Vec<usize> = self
                .pair_words
                .get(&pair)
                .map(|set| set.iter().copied().collect())
                .unwrap_or_default();
            for w in affected {
                self.remove_word_pairs(w);
                self.words[w].seq = rewrite(&self.words[w].seq, x, y, z);
                self.add_word_pairs(w);
            }
            return Some(z);
        }
    }

    fn finish(self) -> BpeModel {
        let mut rank = BTreeMap::new();
        for (order, (x, y, z)) in self.merges.iter().enumerate() {
            rank.insert((*x, *y), (order as u32, *z));
        }
        let n_base = self.surfaces.len() - self.merges.len();
        BpeModel {
            surfaces: self.surfaces,
            n_base,
            merges: self.merges,
            rank,
            char_ids: self.char_ids,
        }
    }
}

fn count_occurrences(seq: &[u32], pair: (u32, u32)) -> u64 {
    let mut n = 0;
    for i in 0..seq.len().saturating_sub(1) {
        if (seq[i], seq[i + 1]) == pair {
            n += 1;
        }
    }
    n
}

/// Merge list as text, one `left right` line per merge in training order.
pub fn render_merges(model: &BpeModel) -> String {
    let mut out = String::new();
    for (left, right) in model.merge_surfaces() {
        out.push_str(&escape_field(left));
        out.push(' ');
        out.push_str(&escape_field(right));
        out.push('\n');
    }
    out
}

/// Parses [`render_merges`] output.
pub fn parse_merges(source: &str) -> Result<Vec<(String, String)>, BpeError> {
    let mut merges = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let (left, right) = line.split_once(' ').ok_or(BpeError::Format {
            line: idx + 1,
            reason: "expected `left right`",
        })?;
        let left = unescape_field(left).map_err(|_| BpeError::Format {
            line: idx + 1,
            reason: "bad escape in left symbol",
        })?;
        let right = unescape_field(right).map_err(|_| BpeError::Format {
            line: idx + 1,
            reason: "bad escape in right symbol",
        })?;
        merges.push((left, right));
    }
    Ok(merges)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BpeError {
    EmptyCorpus,
    VocabTooSmall { base: usize, requested: usize },
    InvalidBase(&'static str),
    UnknownSymbol(String),
    DuplicateSymbol(String),
    BadId(u32),
    Format { line: usize, reason: &'static str },
}

impl fmt::Display for BpeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BpeError::EmptyCorpus => f.write_str("training corpus is empty"),
            BpeError::VocabTooSmall { base, requested } => write!(
                f,
                "vocab size {requested} is below the {base} base symbols"
            ),
            BpeError::InvalidBase(why) => write!(f, "invalid base inventory: {why}"),
            BpeError::UnknownSymbol(s) => write!(f, "merge references unknown symbol {s:?}"),
            BpeError::DuplicateSymbol(s) => write!(f, "duplicate symbol surface {s:?}"),
            BpeError::BadId(id) => write!(f, "symbol id {id} out of range"),
            BpeError::Format { line, reason } => {
                write!(f, "bad merge file (line {line}): {reason}")
            }
        }
    }
}

impl core::error::Error for BpeError {}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(entries: &[(&str, u64)]) -> FrequencyTable {
        let mut t = FrequencyTable::new();
        for (raw, count) in entries {
            t.add(raw, *count);
        }
        t
    }

    fn chunk(raw: &str) -> Chunk {
        Chunk::from_raw(raw).expect("single chunk")
    }

    #[test]
    fn first_merge_counts_overlapping_pairs() {
        let counts = table(&[("aaab", 2)]);
        let mut trainer = BpeTrainer::new(&counts).unwrap();
        let a = trainer.char_ids[&'a'];
        let b = trainer.char_ids[&'b'];
        assert_eq!(trainer.pair_counts[&(a, a)], 4);
        assert_eq!(trainer.pair_counts[&(a, b)], 2);
        let z = trainer.step().unwrap();
        assert_eq!(trainer.surfaces[z as usize], "aa");
    }

    #[test]
    fn encode_applies_single_merge() {
        let counts = table(&[("aaab", 2)]);
        let base = 256 + 1 + 2;
        let model = train_bpe(&counts, base + 1).unwrap();
        assert_eq!(model.merge_count(), 1);
        let symbols = encode_bpe(&model, &chunk("aaab"));
        assert_eq!(symbols, vec!["aa", "a", "b"]);
    }

    #[test]
    fn vocab_equal_to_base_is_a_character_model() {
        let counts = table(&[("aaab", 2)]);
        let model = train_bpe(&counts, 259).unwrap();
        assert_eq!(model.merge_count(), 0);
        let symbols = encode_bpe(&model, &chunk("aaab"));
        assert_eq!(symbols, vec!["a", "a", "a", "b"]);
    }

    #[test]
    fn vocab_below_base_is_rejected_and_empty_corpus_too() {
        let counts = table(&[("aaab", 2)]);
        assert!(matches!(
            train_bpe(&counts, 100),
            Err(BpeError::VocabTooSmall { base: 259, .. })
        ));
        assert!(matches!(
            train_bpe(&FrequencyTable::new(), 300),
            Err(BpeError::EmptyCorpus)
        ));
    }

    #[test]
    fn merge_exhaustion_reports_achieved_size() {
        let counts = table(&[("ab", 1)]);
        let model = train_bpe(&counts, 1000).unwrap();
        // One learnable merge; the model stops there.
        assert_eq!(model.merge_count(), 1);
        assert_eq!(model.vocab_size(), 256 + 1 + 2 + 1);
    }

    #[test]
    fn tie_breaks_by_first_seen_in_deterministic_order() {
        // Equal pair counts; "ab" outranks "cd" because the deterministic
        // corpus order (count desc, then raw ascending) sees it first.
        let counts = table(&[("ab", 3), ("cd", 3)]);
        let model = train_bpe(&counts, 256 + 1 + 4 + 1).unwrap();
        let merges: Vec<(String, String)> = model
            .merge_surfaces()
            .map(|(l, r)| (l.to_string(), r.to_string()))
            .collect();
        assert_eq!(merges, vec![("a".to_string(), "b".to_string())]);
    }

    #[test]
    fn training_is_deterministic() {
        let counts = table(&[("hejsa", 4), (" hej", 9), ("hej!", 2), ("sav", 7)]);
        let a = train_bpe(&counts, 300).unwrap();
        let b = train_bpe(&counts, 300).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn round_trip_covers_markers_bytes_and_unseen_text() {
        let counts = table(&[(" hej", 5), ("hej", 3), ("med", 2), ("dig!", 2)]);
        let model = train_bpe(&counts, 280).unwrap();
        let cases = [
            " hej",
            "hej!",
            " ",
            "  to",
            "\thej",
            "🙂🙂",
            "a\u{2581}b",
            "<0xAB>",
            "π≈3",
            "dig!…",
        ];
        for raw in cases {
            let ids = model.encode_ids(&chunk(raw));
            assert_eq!(model.decode_ids(&ids).unwrap(), raw, "case {raw:?}");
        }
    }

    #[test]
    fn monotone_compression_and_scratch_recount() {
        let counts = table(&[
            ("abab", 7),
            ("ababab", 3),
            ("bab", 5),
            ("aabb", 2),
            (" ab", 4),
            ("ba", 1),
        ]);
        let mut trainer = BpeTrainer::new(&counts).unwrap();
        let total = |t: &BpeTrainer| -> u64 {
            t.words.iter().map(|w| w.seq.len() as u64 * w.weight).sum()
        };
        let recount = |t: &BpeTrainer| -> BTreeMap<(u32, u32), u64> {
            let mut m = BTreeMap::new();
            for w in &t.words {
                for i in 0..w.seq.len().saturating_sub(1) {
                    let (x, y) = (w.seq[i], w.seq[i + 1]);
                    if t.is_countable(x, y) {
                        *m.entry((x, y)).or_insert(0) += w.weight;
                    }
                }
            }
            m
        };
        assert_eq!(recount(&trainer), trainer.pair_counts);
        let mut prev_total = total(&trainer);
        for _ in 0..10 {
            let Some(_) = trainer.step() else { break };
            let now = total(&trainer);
            assert!(now < prev_total, "merge must shrink the corpus");
            prev_total = now;
            assert_eq!(recount(&trainer), trainer.pair_counts);
            for (pair, words) in &trainer.pair_words {
                for w in words {
                    assert!(count_occurrences(&trainer.words[*w].seq, *pair) > 0);
                }
            }
        }
    }

    #[test]
    fn space_round_trips_even_when_training_never_saw_one() {
        let counts = table(&[("ab", 4)]);
        let model = train_bpe(&counts, 400).unwrap();
        assert_eq!(model.surface(256), Some("\u{2581}"));
        for raw in [" ab", "  ", "a b"] {
            for piece in crate::corpus::chunk_text(raw) {
                let ids = model.encode_ids(&piece);
                assert_eq!(model.decode_ids(&ids).unwrap(), piece.raw());
            }
        }
    }

    #[test]
    fn merge_file_round_trips_the_model() {
        let counts = table(&[("abab", 7), ("bab", 5), (" ab", 4)]);
        let model = train_bpe(&counts, 268).unwrap();
        assert!(model.merge_count() > 3);
        let text = render_merges(&model);
        let merges = parse_merges(&text).unwrap();
        let rebuilt = BpeModel::from_parts(model.base_symbols().to_vec(), &merges).unwrap();
        assert_eq!(rebuilt, model);
        assert_eq!(render_merges(&rebuilt), text);
    }

    #[test]
    fn text_surfaces_stay_unique() {
        // Both ("a","bc") and ("ab","c") style derivations are reachable;
        // whichever would duplicate a surface must be skipped.
        let counts = table(&[
            ("xabc", 5),
            ("abcy", 5),
            ("ab", 9),
            ("bc", 9),
            ("abc", 2),
        ]);
        let model = train_bpe(&counts, 256 + 60).unwrap();
        let mut seen = BTreeSet::new();
        for s in model.surfaces() {
            assert!(seen.insert(s.clone()), "duplicate surface {s:?}");
        }
        for raw in ["xabc", "abcy", "abc", "xxabcbc"] {
            let ids = model.encode_ids(&chunk(raw));
            assert_eq!(model.decode_ids(&ids).unwrap(), raw);
        }
    }

    #[test]
    fn budgeted_training_stops_at_exact_new_surface_count() {
        let counts = table(&[("abab", 7), ("bab", 5), (" ab", 4), ("baba", 2)]);
        let existing: BTreeSet<String> = train_bpe(&counts, 259)
            .unwrap()
            .surfaces()
            .iter()
            .cloned()
            .collect();
        // All base symbols are pre-existing, so the budget is spent purely
        // on merge results that are new surfaces.
        let budget = 4;
        let model = train_bpe_for_new_surfaces(&counts, &existing, budget).unwrap();
        let new: Vec<&String> = model
            .surfaces()
            .iter()
            .filter(|s| !existing.contains(*s))
            .collect();
        assert_eq!(new.len(), budget);
    }

    #[test]
    fn from_parts_rejects_corrupt_input() {
        let counts = table(&[("ab", 2)]);
        let model = train_bpe(&counts, 259).unwrap();
        let base = model.base_symbols().to_vec();
        let bad = vec![("a".to_string(), "zz".to_string())];
        assert!(matches!(
            BpeModel::from_parts(base.clone(), &bad),
            Err(BpeError::UnknownSymbol(_))
        ));
        let dup = vec![
            ("a".to_string(), "b".to_string()),
            ("a".to_string(), "b".to_string()),
        ];
        assert!(matches!(
            BpeModel::from_parts(base.clone(), &dup),
            Err(BpeError::DuplicateSymbol(_))
        ));
        let mut wrong_base = base;
        wrong_base[0] = "oops".to_string();
        assert!(matches!(
            BpeModel::from_parts(wrong_base, &[]),
            Err(BpeError::InvalidBase(_))
        ));
        assert!(parse_merges("justoneword\n").is_err());
    }
}
