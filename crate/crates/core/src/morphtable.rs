//! Pre-segmented table of the most frequent chunks.
//!
//! The table maps chunk raws (leading whitespace included, so `" dig"` and
//! `"dig"` are distinct keys) to segment lists produced by the trained
//! segmentation model. Its segment inventory is seeded with everything the
//! character-level fallback can ever emit: the 256 byte surfaces, the bare
//! whitespace marker, and every corpus code point both bare and
//! marker-prefixed. Chunks are then walked in descending frequency and the
//! walk stops entirely before the entry that would push the inventory past
//! its target size, so a larger target always yields a superset table.
//!
//! Chunks whose raw contains a literal U+2581 get no entry: table segments
//! are plain text whose markers decode to spaces, so no segment list could
//! reproduce such a raw. Those chunks still encode via the byte-expanding
//! fallback paths.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{Chunk, FrequencyTable};
use crate::escape::{escape_field, unescape_field};
use crate::morfessor::{viterbi_segment, MorfessorModel};
use crate::symbol::{byte_surface, is_special_char, mark_raw, MarkedCp, MARKER};

pub const MORPHTABLE_FORMAT_VERSION: u32 = 1;

/// Frequency-ordered chunk entries plus the segment inventory they draw on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphTable {
    entries: Vec<(String, Vec<String>)>,
    index: BTreeMap<String, usize>,
    inventory: Vec<String>,
    inventory_set: BTreeSet<String>,
    declared_inventory: usize,
}

impl MorphTable {
    /// Entries in the order they were recorded (descending chunk frequency).
    pub fn entries(&self) -> &[(String, Vec<String>)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Exact-match lookup on a chunk raw (case- and whitespace-exact).
    pub fn get(&self, raw: &str) -> Option<&[String]> {
        self.index.get(raw).map(|&i| self.entries[i].1.as_slice())
    }

    /// Distinct segments in first-use order: byte surfaces, the bare
    /// marker, seeded code points, then segments added by entries. A table
    /// parsed back from its file form carries only its entries' segments;
    /// the full seeded inventory lives in the bundle vocabulary.
    pub fn inventory(&self) -> &[String] {
        &self.inventory
    }

    pub fn inventory_len(&self) -> usize {
        self.inventory.len()
    }

    pub fn contains_segment(&self, segment: &str) -> bool {
        self.inventory_set.contains(segment)
    }

    /// Inventory size named in the file header. Equals [`inventory_len`]
    /// on a freshly built table; on a parsed one it preserves the builder's
    /// figure while [`inventory`] holds only the entries' segments.
    ///
    /// [`inventory`]: MorphTable::inventory
    /// [`inventory_len`]: MorphTable::inventory_len
    pub fn declared_inventory(&self) -> usize {
        self.declared_inventory
    }
}

/// Exact-match lookup; a miss sends the cascade to its next stage.
pub fn lookup<'a>(table: &'a MorphTable, chunk: &Chunk) -> Option<&'a [String]> {
    table.get(chunk.raw())
}

/// Builds the table: seed the inventory, then walk chunks by descending
/// frequency, segmenting each and recording it, stopping entirely before
/// the chunk whose new segments would exceed `target_inventory_size`.
pub fn build_morphtable(
    counts: &FrequencyTable,
    model: &MorfessorModel,
    target_inventory_size: usize,
) -> Result<MorphTable, MorphTableError> {
    if counts.is_empty() {
        return Err(MorphTableError::EmptyCorpus);
    }
    let mut inventory: Vec<String> = Vec::new();
    let mut inventory_set: BTreeSet<String> = BTreeSet::new();
    let push = |inventory: &mut Vec<String>, set: &mut BTreeSet<String>, s: String| {
        if set.insert(s.clone()) {
            inventory.push(s);
        }
    };
    for b in 0..=255u8 {
        push(&mut inventory, &mut inventory_set, byte_surface(b));
    }
    push(&mut inventory, &mut inventory_set, String::from(MARKER));
    let mut cps: BTreeSet<char> = BTreeSet::new();
    for (raw, _) in counts.iter() {
        for mc in mark_raw(raw) {
            if let MarkedCp::Text(c) = mc {
                if c != MARKER {
                    cps.insert(c);
                }
            }
        }
    }
    for c in cps {
        push(&mut inventory, &mut inventory_set, c.to_string());
        let mut marked = String::from(MARKER);
        marked.push(c);
        push(&mut inventory, &mut inventory_set, marked);
    }
    if target_inventory_size < inventory.len() {
        return Err(MorphTableError::TargetTooSmall {
            seed: inventory.len(),
            requested: target_inventory_size,
        });
    }

    let mut entries: Vec<(String, Vec<String>)> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    'walk: for (raw, _) in counts.ordered_entries() {
        let Some(segments) = segment_chunk_raw(raw, model) else {
            continue;
        };
        debug_assert_eq!(restore_segments(&segments), raw);
        let mut fresh: BTreeSet<&String> = BTreeSet::new();
        for seg in &segments {
            if !inventory_set.contains(seg) {
                fresh.insert(seg);
            }
        }
        if inventory.len() + fresh.len() > target_inventory_size {
            break 'walk;
        }
        for seg in &segments {
            if !inventory_set.contains(seg) {
                push(&mut inventory, &mut inventory_set, seg.clone());
            }
        }
        index.insert(raw.to_string(), entries.len());
        entries.push((raw.to_string(), segments));
    }
    let declared_inventory = inventory.len();
    Ok(MorphTable {
        entries,
        index,
        inventory,
        inventory_set,
        declared_inventory,
    })
}

/// Segments one chunk raw for a table entry: marked leading whitespace is
/// fused onto the first segment, the maximal trailing special run splits
/// into single-character segments, the rest of the body goes through
/// Viterbi, and document-final whitespace becomes a final marked segment.
/// None: the raw is not a valid single chunk, or contains a literal marker.
/// The cascade tokenizer reuses this as its model-segmentation stage.
pub(crate) fn segment_chunk_raw(raw: &str, model: &MorfessorModel) -> Option<Vec<String>> {
    if raw.contains(MARKER) {
        return None;
    }
    let chunk = Chunk::from_raw(raw)?;
    let body = chunk.body();
    let special_start = body
        .char_indices()
        .rev()
        .take_while(|(_, c)| is_special_char(*c))
        .last()
        .map(|(i, _)| i)
        .unwrap_or(body.len());
    let word = &body[..special_start];
    let mut segments: Vec<String> = if word.is_empty() {
        Vec::new()
    } else {
        viterbi_segment(model, word).ok()?.segments
    };
    for c in body[special_start..].chars() {
        segments.push(c.to_string());
    }
    let lead = mark_whitespace(chunk.leading_whitespace());
    if !lead.is_empty() {
        match segments.first_mut() {
            Some(first) => first.insert_str(0, &lead),
            None => segments.push(lead),
        }
    }
    let trail = mark_whitespace(chunk.trailing_whitespace());
    if !trail.is_empty() {
        segments.push(trail);
    }
    Some(segments)
}

/// Spaces become markers; tabs and newlines stay literal.
fn mark_whitespace(ws: &str) -> String {
    ws.chars().map(|c| if c == ' ' { MARKER } else { c }).collect()
}

/// Inverse of the marking convention for entry segments.
fn restore_segments(segments: &[String]) -> String {
    let mut out = String::new();
    for seg in segments {
        for c in seg.chars() {
            out.push(if c == MARKER { ' ' } else { c });
        }
    }
    out
}

/// Table as text: a header recording the marker and inventory size, then
/// one `raw<TAB>seg1 seg2 ...` line per entry in recorded order.
pub fn render_morphtable(table: &MorphTable) -> String {
    let mut out = String::new();
    out.push_str("morphtable v1\tmarker=");
    out.push(MARKER);
    out.push_str("\tinventory=");
    out.push_str(&table.declared_inventory.to_string());
    out.push('\n');
    for (raw, segments) in &table.entries {
        out.push_str(&escape_field(raw));
        out.push('\t');
        for (i, seg) in segments.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&escape_field(seg));
        }
        out.push('\n');
    }
    out
}

/// Parses [`render_morphtable`] output. The parsed inventory holds the
/// entries' own segments (in first-use order); see [`MorphTable::inventory`].
pub fn parse_morphtable(source: &str) -> Result<MorphTable, MorphTableParseError> {
    let mut lines = source.lines().enumerate();
    let (_, header) = lines.next().ok_or(MorphTableParseError::Corrupt {
        line: 1,
        reason: "empty input",
    })?;
    let mut fields = header.split('\t');
    let version = fields.next().unwrap_or("");
    if version != "morphtable v1" {
        return Err(MorphTableParseError::UnsupportedVersion {
            found: version.to_string(),
        });
    }
    let marker = fields.next().and_then(|f| f.strip_prefix("marker="));
    if marker != Some(String::from(MARKER).as_str()) {
        return Err(MorphTableParseError::Corrupt {
            line: 1,
            reason: "missing or foreign marker field",
        });
    }
    let declared: usize = fields
        .next()
        .and_then(|f| f.strip_prefix("inventory="))
        .and_then(|n| n.parse().ok())
        .ok_or(MorphTableParseError::Corrupt {
            line: 1,
            reason: "missing inventory field",
        })?;

    let mut entries: Vec<(String, Vec<String>)> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut inventory: Vec<String> = Vec::new();
    let mut inventory_set: BTreeSet<String> = BTreeSet::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let (raw_field, segs_field) =
            line.split_once('\t').ok_or(MorphTableParseError::Corrupt {
                line: line_no,
                reason: "expected raw<TAB>segments",
            })?;
        let raw = unescape_field(raw_field).map_err(|_| MorphTableParseError::Corrupt {
            line: line_no,
            reason: "bad escape in chunk raw",
        })?;
        let mut segments = Vec::new();
        for field in segs_field.split(' ') {
            if field.is_empty() {
                return Err(MorphTableParseError::Corrupt {
                    line: line_no,
                    reason: "empty segment",
                });
            }
            let seg = unescape_field(field).map_err(|_| MorphTableParseError::Corrupt {
                line: line_no,
                reason: "bad escape in segment",
            })?;
            segments.push(seg);
        }
        if restore_segments(&segments) != raw {
            return Err(MorphTableParseError::Corrupt {
                line: line_no,
                reason: "segments do not reconstruct the chunk",
            });
        }
        if index.insert(raw.clone(), entries.len()).is_some() {
            return Err(MorphTableParseError::Corrupt {
                line: line_no,
                reason: "duplicate chunk entry",
            });
        }
        for seg in &segments {
            if inventory_set.insert(seg.clone()) {
                inventory.push(seg.clone());
            }
        }
        entries.push((raw, segments));
    }
    if inventory.len() > declared {
        return Err(MorphTableParseError::Corrupt {
            line: 1,
            reason: "entries use more segments than the declared inventory",
        });
    }
    Ok(MorphTable {
        entries,
        index,
        inventory,
        inventory_set,
        declared_inventory: declared,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MorphTableError {
    EmptyCorpus,
    TargetTooSmall { seed: usize, requested: usize },
}

impl fmt::Display for MorphTableError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorphTableError::EmptyCorpus => f.write_str("chunk frequency table is empty"),
            MorphTableError::TargetTooSmall { seed, requested } => write!(
                f,
                "inventory target {requested} is below the {seed} seeded segments"
            ),
        }
    }
}

impl core::error::Error for MorphTableError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MorphTableParseError {
    UnsupportedVersion { found: String },
    Corrupt { line: usize, reason: &'static str },
}

impl fmt::Display for MorphTableParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorphTableParseError::UnsupportedVersion { found } => {
                write!(f, "unsupported morphtable format {found:?}")
            }
            MorphTableParseError::Corrupt { line, reason } => {
                write!(f, "bad morphtable file (line {line}): {reason}")
            }
        }
    }
}

impl core::error::Error for MorphTableParseError {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morfessor::{train_unsupervised, TrainOptions};

    fn model_for(words: &[(&str, u64)]) -> MorfessorModel {
        let mut counts = FrequencyTable::new();
        for (w, n) in words {
            counts.add(w, *n);
        }
        train_unsupervised(&counts, &TrainOptions::default())
            .expect("training corpus is valid")
            .model
    }

    fn table_counts(raws: &[(&str, u64)]) -> FrequencyTable {
        let mut counts = FrequencyTable::new();
        for (raw, n) in raws {
            counts.add(raw, *n);
        }
        counts
    }

    fn seed_size(counts: &FrequencyTable) -> usize {
        let mut cps = BTreeSet::new();
        for (raw, _) in counts.iter() {
            for mc in mark_raw(raw) {
                if let MarkedCp::Text(c) = mc {
                    if c != MARKER {
                        cps.insert(c);
                    }
                }
            }
        }
        256 + 1 + 2 * cps.len()
    }

    #[test]
    fn target_at_seed_size_yields_entryless_table() {
        let counts = table_counts(&[("ab", 5), (" ab", 3)]);
        let model = model_for(&[("ab", 8)]);
        let seed = seed_size(&counts);
        let table = build_morphtable(&counts, &model, seed).unwrap();
        assert!(table.is_empty());
        assert_eq!(table.inventory_len(), seed);
        assert_eq!(table.inventory()[0], "<0x00>");
        assert_eq!(table.inventory()[255], "<0xFF>");
        assert_eq!(table.inventory()[256], "\u{2581}");
        assert!(table.contains_segment("a"));
        assert!(table.contains_segment("\u{2581}a"));
        assert!(table.contains_segment("b"));
        assert!(table.contains_segment("\u{2581}b"));
    }

    #[test]
    fn most_frequent_chunk_is_segmented_first() {
        // The trained lexicon reuses "skole" and "taske" across compounds,
        // so the compound's table entry is the two-way split.
        let model = model_for(&[("skole", 20), ("taske", 20), ("skoletaske", 5)]);
        let counts = table_counts(&[("skoletaske", 50), ("andre", 1)]);
        let table = build_morphtable(&counts, &model, seed_size(&counts) + 16).unwrap();
        assert_eq!(table.entries()[0].0, "skoletaske");
        assert_eq!(table.entries()[0].1, vec!["skole", "taske"]);
    }

    #[test]
    fn leading_space_fuses_marker_and_keys_stay_space_exact() {
        let model = model_for(&[("ven", 30), ("lig", 30), ("venlig", 10)]);
        let counts = table_counts(&[(" venlig", 40), ("venlig", 9)]);
        let table = build_morphtable(&counts, &model, seed_size(&counts) + 32).unwrap();
        assert_eq!(
            table.get(" venlig").unwrap(),
            ["\u{2581}ven".to_string(), "lig".to_string()]
        );
        assert_eq!(table.get("venlig").unwrap(), ["ven", "lig"]);
        let absent = Chunk::from_raw(" Venlig").unwrap();
        assert_eq!(lookup(&table, &absent), None);
        let present = Chunk::from_raw(" venlig").unwrap();
        assert_eq!(lookup(&table, &present).unwrap()[0], "\u{2581}ven");
    }

    #[test]
    fn trailing_specials_and_final_whitespace_split_off() {
        let model = model_for(&[("dig", 10)]);
        let counts = table_counts(&[(" dig!?", 6), ("dig \t", 4), ("  dig", 2), (" !", 1)]);
        let table = build_morphtable(&counts, &model, seed_size(&counts) + 32).unwrap();
        assert_eq!(
            table.get(" dig!?").unwrap(),
            ["\u{2581}dig".to_string(), "!".to_string(), "?".to_string()]
        );
        assert_eq!(
            table.get("dig \t").unwrap(),
            ["dig".to_string(), "\u{2581}\t".to_string()]
        );
        assert_eq!(table.get("  dig").unwrap(), ["\u{2581}\u{2581}dig"]);
        assert_eq!(table.get(" !").unwrap(), ["\u{2581}!"]);
        for (raw, segments) in table.entries() {
            assert_eq!(&restore_segments(segments), raw);
        }
    }

    #[test]
    fn walk_stops_before_exceeding_target_and_grows_monotonically() {
        let model = model_for(&[("abe", 12), ("kat", 12), ("abekat", 3)]);
        let counts = table_counts(&[("abekat", 9), ("kat", 8), ("abe", 7)]);
        let seed = seed_size(&counts);
        // "abekat" needs both "abe" and "kat"; one slot is not enough, so
        // the walk stops with no entries at all.
        let one_slot = build_morphtable(&counts, &model, seed + 1).unwrap();
        assert!(one_slot.is_empty());
        assert_eq!(one_slot.inventory_len(), seed);
        let two_slots = build_morphtable(&counts, &model, seed + 2).unwrap();
        assert_eq!(two_slots.len(), 3);
        assert_eq!(two_slots.inventory_len(), seed + 2);
        let roomy = build_morphtable(&counts, &model, seed + 50).unwrap();
        assert_eq!(&roomy.entries()[..2], &two_slots.entries()[..2]);
        assert!(roomy.inventory_len() <= seed + 50);
    }

    #[test]
    fn literal_marker_chunks_are_skipped_not_fatal() {
        let model = model_for(&[("ab", 10)]);
        let counts = table_counts(&[("a\u{2581}b", 50), ("ab", 3)]);
        let table = build_morphtable(&counts, &model, 600).unwrap();
        assert_eq!(table.get("a\u{2581}b"), None);
        assert!(table.get("ab").is_some());
    }

    #[test]
    fn rejects_empty_counts_and_small_targets() {
        let model = model_for(&[("ab", 10)]);
        assert_eq!(
            build_morphtable(&FrequencyTable::new(), &model, 10_000),
            Err(MorphTableError::EmptyCorpus)
        );
        let counts = table_counts(&[("ab", 5)]);
        let seed = seed_size(&counts);
        assert_eq!(
            build_morphtable(&counts, &model, seed - 1),
            Err(MorphTableError::TargetTooSmall {
                seed,
                requested: seed - 1
            })
        );
    }

    #[test]
    fn file_form_round_trips_entries() {
        let model = model_for(&[("ven", 30), ("lig", 30)]);
        let counts = table_counts(&[(" venlig", 40), ("venlig!", 9), ("lig \t", 2)]);
        let table = build_morphtable(&counts, &model, seed_size(&counts) + 32).unwrap();
        assert!(table.len() >= 2);
        let text = render_morphtable(&table);
        assert!(text.starts_with("morphtable v1\tmarker=\u{2581}\tinventory="));
        let parsed = parse_morphtable(&text).unwrap();
        assert_eq!(parsed.entries(), table.entries());
        assert_eq!(parsed.get(" venlig"), table.get(" venlig"));
        assert_eq!(render_morphtable(&parsed), text);
    }

    #[test]
    fn parse_rejects_corrupt_input() {
        assert!(matches!(
            parse_morphtable("morphtable v9\tmarker=\u{2581}\tinventory=3\n"),
            Err(MorphTableParseError::UnsupportedVersion { .. })
        ));
        assert!(matches!(
            parse_morphtable(""),
            Err(MorphTableParseError::Corrupt { line: 1, .. })
        ));
        let good_header = "morphtable v1\tmarker=\u{2581}\tinventory=300\n";
        let missing_tab = format!("{good_header}venlig ven lig\n");
        assert!(parse_morthable_err(&missing_tab, 2));
        let bad_restore = format!("{good_header}venlig\tven lag\n");
        assert!(parse_morthable_err(&bad_restore, 2));
        let dup = format!("{good_header}ab\tab\nab\tab\n");
        assert!(parse_morthable_err(&dup, 3));
    }

    fn parse_morthable_err(source: &str, at_line: usize) -> bool {
        matches!(
            parse_morphtable(source),
            Err(MorphTableParseError::Corrupt { line, .. }) if line == at_line
        )
    }
}
