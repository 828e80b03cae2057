//! The cascade tokenizer: morphtable, then the segmentation model, then a
//! last-resort fallback that never fails.
//!
//! Two variants share the cascade's first two stages. `Morph` falls back to
//! single marked code points (bytes for code points outside the
//! vocabulary); `Mixed` falls back to a BPE model trained on the same
//! counts. Stage two is all-or-nothing per chunk: if any model segment
//! lacks an id, the whole chunk falls through.
//!
//! The vocabulary is id-contiguous from 0: four specials, then the
//! morphtable's segment inventory in insertion order, then (Mixed) the BPE
//! symbols in creation order, deduplicated by surface and kind. Whether an
//! id is a special, a byte, or text is recorded per entry, so decoding
//! never guesses from the spelling and `decode(encode(d)) == d` holds for
//! arbitrary input.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::bpe::{
    parse_merges, render_merges, train_bpe_for_new_surfaces, BpeError, BpeModel,
};
use crate::corpus::{chunk_text, Chunk, FrequencyTable};
use crate::escape::{escape_field, fmt_f64, parse_f64, unescape_field};
use crate::morfessor::{load_model, save_model, MorfessorModel, ModelParseError};
use crate::morphtable::{
    build_morphtable, parse_morphtable, render_morphtable, segment_chunk_raw, MorphTable,
    MorphTableError, MorphTableParseError,
};
use crate::symbol::{byte_surface, mark_raw, parse_byte_surface, MarkedCp, SurfaceDecoder, MARKER};

/// Reserved tokens, in id order.
pub const SPECIAL_TOKENS: [&str; 4] = ["<unk>", "<s>", "</s>", "<pad>"];
pub const UNKNOWN_ID: u32 = 0;
pub const BEGIN_ID: u32 = 1;
pub const END_ID: u32 = 2;
pub const PAD_ID: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Morph,
    Mixed,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Morph => "morph",
            Variant::Mixed => "mixed",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        match s {
            "morph" => Some(Variant::Morph),
            "mixed" => Some(Variant::Mixed),
            _ => None,
        }
    }
}

/// What a vocabulary entry stands for; decoding dispatches on this, never
/// on the surface spelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Special,
    Byte(u8),
    Text,
}

impl TokenKind {
    pub fn name(self) -> &'static str {
        match self {
            TokenKind::Special => "special",
            TokenKind::Byte(_) => "byte",
            TokenKind::Text => "text",
        }
    }
}

/// Which cascade stage produced a chunk's tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CascadeStage {
    Table,
    Segmentation,
    Fallback,
}

/// Per-stage chunk counters for one encode call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CascadeCounts {
    pub table: u64,
    pub segmentation: u64,
    pub fallback: u64,
}

impl CascadeCounts {
    fn bump(&mut self, stage: CascadeStage) {
        match stage {
            CascadeStage::Table => self.table += 1,
            CascadeStage::Segmentation => self.segmentation += 1,
            CascadeStage::Fallback => self.fallback += 1,
        }
    }
}

/// Ids and their surfaces, index-aligned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub ids: Vec<u32>,
    pub surfaces: Vec<String>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// A built tokenizer: cascade components plus the id vocabulary.
#[derive(Debug, Clone)]
pub struct TokenizerBundle {
    variant: Variant,
    morph_ratio: f64,
    morph_budget: usize,
    bpe_budget: usize,
    table: MorphTable,
    model: MorfessorModel,
    bpe: Option<BpeModel>,
    bpe_to_bundle: Vec<u32>,
    surfaces: Vec<String>,
    kinds: Vec<TokenKind>,
    text_ids: BTreeMap<String, u32>,
    byte_ids: [u32; 256],
}

impl TokenizerBundle {
    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn vocab_size(&self) -> usize {
        self.surfaces.len()
    }

    pub fn surface(&self, id: u32) -> Option<&str> {
        self.surfaces.get(id as usize).map(String::as_str)
    }

    pub fn kind(&self, id: u32) -> Option<TokenKind> {
        self.kinds.get(id as usize).copied()
    }

    /// Id of a text token by surface; specials and bytes live elsewhere.
    pub fn id_of_text(&self, surface: &str) -> Option<u32> {
        self.text_ids.get(surface).copied()
    }

    pub fn table(&self) -> &MorphTable {
        &self.table
    }

    pub fn model(&self) -> &MorfessorModel {
        &self.model
    }

    pub fn bpe(&self) -> Option<&BpeModel> {
        self.bpe.as_ref()
    }

    /// Target sizes, not necessarily achieved: a small corpus can exhaust
    /// its segments or merges first, leaving the vocabulary short.
    pub fn morph_budget(&self) -> usize {
        self.morph_budget
    }

    pub fn bpe_budget(&self) -> usize {
        self.bpe_budget
    }

    pub fn morph_ratio(&self) -> f64 {
        self.morph_ratio
    }

    fn text_ids_for(&self, segments: &[String]) -> Option<Vec<u32>> {
        let mut ids = Vec::with_capacity(segments.len());
        for seg in segments {
            ids.push(*self.text_ids.get(seg)?);
        }
        Some(ids)
    }

    fn chunk_ids(&self, chunk: &Chunk) -> (Vec<u32>, CascadeStage) {
        if let Some(segments) = self.table.get(chunk.raw()) {
            if let Some(ids) = self.text_ids_for(segments) {
                return (ids, CascadeStage::Table);
            }
        }
        if let Some(segments) = segment_chunk_raw(chunk.raw(), &self.model) {
            if let Some(ids) = self.text_ids_for(&segments) {
                return (ids, CascadeStage::Segmentation);
            }
        }
        let ids = match &self.bpe {
            Some(bpe) => bpe
                .encode_ids(chunk)
                .iter()
                .map(|&id| self.bpe_to_bundle[id as usize])
                .collect(),
            None => self.marked_code_point_ids(chunk),
        };
        (ids, CascadeStage::Fallback)
    }

    /// Character-level fallback: one token per marked code point, bytes for
    /// code points outside the vocabulary.
    fn marked_code_point_ids(&self, chunk: &Chunk) -> Vec<u32> {
        let mut ids = Vec::new();
        for mc in mark_raw(chunk.raw()) {
            match mc {
                MarkedCp::Text(c) => {
                    let mut buf = [0u8; 4];
                    let s: &str = c.encode_utf8(&mut buf);
                    match self.text_ids.get(s) {
                        Some(&id) => ids.push(id),
                        None => {
                            debug_assert_ne!(c, MARKER, "marker is always in the vocabulary");
                            for b in s.bytes() {
                                ids.push(self.byte_ids[b as usize]);
                            }
                        }
                    }
                }
                MarkedCp::Byte(b) => ids.push(self.byte_ids[b as usize]),
            }
        }
        ids
    }
}

/// Splits the non-special id space per the morph ratio, rounding the morph
/// share half-up. None when the ratio is not in (0, 1] or the total cannot
/// even hold the specials.
pub fn vocab_partition(total_vocab: usize, morph_ratio: f64) -> Option<(usize, usize)> {
    if !(morph_ratio > 0.0 && morph_ratio <= 1.0) {
        return None;
    }
    let available = total_vocab.checked_sub(SPECIAL_TOKENS.len())?;
    if available == 0 {
        return None;
    }
    let morph = libm::floor(morph_ratio * available as f64 + 0.5) as usize;
    let morph = morph.min(available);
    Some((morph, available - morph))
}

/// Builds a bundle on chunk counts and a trained segmentation model: split
/// the budget, build the morphtable to the morph share, train BPE (Mixed
/// only) until it adds exactly the BPE share of new text surfaces, and
/// assign ids. Identical inputs give identical bundles.
pub fn build_bundle(
    variant: Variant,
    counts: &FrequencyTable,
    model: MorfessorModel,
    total_vocab: usize,
    morph_ratio: f64,
) -> Result<TokenizerBundle, BuildError> {
    let ratio = match variant {
        Variant::Morph => 1.0,
        Variant::Mixed => morph_ratio,
    };
    let (morph_budget, bpe_budget) = vocab_partition(total_vocab, ratio).ok_or({
        if ratio > 0.0 && ratio <= 1.0 {
            BuildError::VocabTooSmall {
                specials: SPECIAL_TOKENS.len(),
                requested: total_vocab,
            }
        } else {
            BuildError::InvalidRatio
        }
    })?;
    let table = build_morphtable(counts, &model, morph_budget)?;

    let mut surfaces: Vec<String> = Vec::new();
    let mut kinds: Vec<TokenKind> = Vec::new();
    let mut text_ids: BTreeMap<String, u32> = BTreeMap::new();
    let mut byte_ids = [u32::MAX; 256];
    for special in SPECIAL_TOKENS {
        surfaces.push(special.to_string());
        kinds.push(TokenKind::Special);
    }
    for (i, seg) in table.inventory().iter().enumerate() {
        let id = surfaces.len() as u32;
        if i < 256 {
            debug_assert_eq!(*seg, byte_surface(i as u8));
            byte_ids[i] = id;
            surfaces.push(seg.clone());
            kinds.push(TokenKind::Byte(i as u8));
        } else if !text_ids.contains_key(seg) {
            text_ids.insert(seg.clone(), id);
            surfaces.push(seg.clone());
            kinds.push(TokenKind::Text);
        }
    }

    let (bpe, bpe_to_bundle) = match variant {
        Variant::Morph => (None, Vec::new()),
        Variant::Mixed => {
            let existing: BTreeSet<String> = text_ids.keys().cloned().collect();
            let bpe = train_bpe_for_new_surfaces(counts, &existing, bpe_budget)?;
            let mut map = Vec::with_capacity(bpe.vocab_size());
            for (bpe_id, surface) in bpe.surfaces().iter().enumerate() {
                let bundle_id = if bpe_id < 256 {
                    byte_ids[bpe_id]
                } else if let Some(&id) = text_ids.get(surface) {
                    id
                } else {
                    let id = surfaces.len() as u32;
                    text_ids.insert(surface.clone(), id);
                    surfaces.push(surface.clone());
                    kinds.push(TokenKind::Text);
                    id
                };
                map.push(bundle_id);
            }
            (Some(bpe), map)
        }
    };

    Ok(TokenizerBundle {
        variant,
        morph_ratio: ratio,
        morph_budget,
        bpe_budget,
        table,
        model,
        bpe,
        bpe_to_bundle,
        surfaces,
        kinds,
        text_ids,
        byte_ids,
    })
}

/// One chunk through the cascade, as token surfaces.
pub fn segment_chunk(bundle: &TokenizerBundle, chunk: &Chunk) -> Vec<String> {
    let (ids, _) = bundle.chunk_ids(chunk);
    ids.iter()
        .map(|&id| bundle.surfaces[id as usize].clone())
        .collect()
}

/// One chunk through the cascade, reporting which stage produced it.
pub fn segment_chunk_traced(bundle: &TokenizerBundle, chunk: &Chunk) -> (Vec<u32>, CascadeStage) {
    bundle.chunk_ids(chunk)
}

/// Encodes a document to ids only; the cheapest full-document path.
pub fn encode_ids(bundle: &TokenizerBundle, document: &str) -> Vec<u32> {
    let mut ids = Vec::new();
    for chunk in chunk_text(document) {
        ids.extend(bundle.chunk_ids(&chunk).0);
    }
    ids
}

/// Encodes a document; `add_sentinels` wraps the result in begin and end
/// tokens (they decode to nothing, so round trips still hold).
pub fn encode(bundle: &TokenizerBundle, document: &str, add_sentinels: bool) -> TokenSequence {
    let mut ids = Vec::new();
    if add_sentinels {
        ids.push(BEGIN_ID);
    }
    ids.extend(encode_ids(bundle, document));
    if add_sentinels {
        ids.push(END_ID);
    }
    let surfaces = ids
        .iter()
        .map(|&id| bundle.surfaces[id as usize].clone())
        .collect();
    TokenSequence { ids, surfaces }
}

/// [`encode`] plus per-stage chunk counts, for cascade observability.
pub fn encode_traced(bundle: &TokenizerBundle, document: &str) -> (TokenSequence, CascadeCounts) {
    let mut ids = Vec::new();
    let mut counts = CascadeCounts::default();
    for chunk in chunk_text(document) {
        let (chunk_ids, stage) = bundle.chunk_ids(&chunk);
        counts.bump(stage);
        ids.extend(chunk_ids);
    }
    let surfaces = ids
        .iter()
        .map(|&id| bundle.surfaces[id as usize].clone())
        .collect();
    (TokenSequence { ids, surfaces }, counts)
}

/// Inverts [`encode`]: specials vanish, bytes recombine, markers become
/// spaces. Errors only on an out-of-range id.
pub fn decode(bundle: &TokenizerBundle, ids: &[u32]) -> Result<String, TokenizerError> {
    let mut decoder = SurfaceDecoder::new();
    for &id in ids {
        match bundle.kind(id).ok_or(TokenizerError::BadId(id))? {
            TokenKind::Special => {}
            TokenKind::Byte(b) => decoder.push_byte(b),
            TokenKind::Text => decoder.push_text(&bundle.surfaces[id as usize]),
        }
    }
    Ok(decoder.finish())
}

/// The bundle's five on-disk documents; directory IO lives in the
/// companion crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleFiles {
    pub vocab_tsv: String,
    pub morphtable_tsv: String,
    pub morfessor_model: String,
    pub bpe_merges: Option<String>,
    pub config: String,
}

/// Renders every file of a bundle. [`parse_bundle`] inverts this, and
/// rendering the parsed bundle reproduces the files byte for byte.
pub fn render_bundle(bundle: &TokenizerBundle) -> BundleFiles {
    let mut vocab_tsv = String::new();
    for (id, (surface, kind)) in bundle.surfaces.iter().zip(&bundle.kinds).enumerate() {
        vocab_tsv.push_str(&id.to_string());
        vocab_tsv.push('\t');
        vocab_tsv.push_str(&escape_field(surface));
        vocab_tsv.push('\t');
        vocab_tsv.push_str(kind.name());
        vocab_tsv.push('\n');
    }
    let mut config = String::new();
    config.push_str("variant=");
    config.push_str(bundle.variant.name());
    config.push_str("\nmorph-ratio=");
    config.push_str(&fmt_f64(bundle.morph_ratio));
    config.push_str("\nmarker=");
    config.push(MARKER);
    config.push_str("\nspecials=");
    config.push_str(&SPECIAL_TOKENS.join(" "));
    config.push_str("\nmorph-budget=");
    config.push_str(&bundle.morph_budget.to_string());
    config.push_str("\nbpe-budget=");
    config.push_str(&bundle.bpe_budget.to_string());
    config.push('\n');
    BundleFiles {
        vocab_tsv,
        morphtable_tsv: render_morphtable(&bundle.table),
        morfessor_model: save_model(&bundle.model),
        bpe_merges: bundle.bpe.as_ref().map(render_merges),
        config,
    }
}

/// Reassembles a bundle from its files, validating that they agree.
pub fn parse_bundle(files: &BundleFiles) -> Result<TokenizerBundle, BundleParseError> {
    let config = parse_config(&files.config)?;
    let (surfaces, kinds) = parse_vocab(&files.vocab_tsv)?;
    let mut text_ids: BTreeMap<String, u32> = BTreeMap::new();
    let mut byte_ids = [u32::MAX; 256];
    let mut bytes_seen = 0usize;
    for (id, (surface, kind)) in surfaces.iter().zip(&kinds).enumerate() {
        match kind {
            TokenKind::Special => {
                if id >= SPECIAL_TOKENS.len() || SPECIAL_TOKENS[id] != surface {
                    return Err(BundleParseError::Inconsistent(
                        "special tokens must be exactly the four reserved ids",
                    ));
                }
            }
            TokenKind::Byte(b) => {
                if byte_ids[*b as usize] != u32::MAX {
                    return Err(BundleParseError::Inconsistent("duplicate byte token"));
                }
                byte_ids[*b as usize] = id as u32;
                bytes_seen += 1;
            }
            TokenKind::Text => {
                if text_ids.insert(surface.clone(), id as u32).is_some() {
                    return Err(BundleParseError::Inconsistent("duplicate text token"));
                }
            }
        }
    }
    if surfaces.len() < SPECIAL_TOKENS.len()
        || kinds[..SPECIAL_TOKENS.len()]
            .iter()
            .any(|k| *k != TokenKind::Special)
    {
        return Err(BundleParseError::Inconsistent(
            "special tokens must be exactly the four reserved ids",
        ));
    }
    if bytes_seen != 256 {
        return Err(BundleParseError::Inconsistent(
            "vocabulary must carry all 256 byte tokens",
        ));
    }
    if !text_ids.contains_key(String::from(MARKER).as_str()) {
        return Err(BundleParseError::Inconsistent(
            "vocabulary lacks the whitespace marker token",
        ));
    }

    let table = parse_morphtable(&files.morphtable_tsv)?;
    for (_, segments) in table.entries() {
        for seg in segments {
            if !text_ids.contains_key(seg) {
                return Err(BundleParseError::Inconsistent(
                    "morphtable segment missing from the vocabulary",
                ));
            }
        }
    }
    let model = load_model(&files.morfessor_model)?;

    let (bpe, bpe_to_bundle) = match (config.variant, &files.bpe_merges) {
        (Variant::Morph, None) => (None, Vec::new()),
        (Variant::Morph, Some(_)) => {
            return Err(BundleParseError::Inconsistent(
                "morph variant must not carry a merge list",
            ))
        }
        (Variant::Mixed, None) => {
            return Err(BundleParseError::Inconsistent(
                "mixed variant requires a merge list",
            ))
        }
        (Variant::Mixed, Some(merges_text)) => {
            let merges = parse_merges(merges_text)?;
            // Base text symbols are exactly the single-code-point text
            // tokens, in id order; the marker is always the first.
            let mut base: Vec<String> = (0..=255u8).map(byte_surface).collect();
            for (surface, kind) in surfaces.iter().zip(&kinds) {
                if *kind == TokenKind::Text && surface.chars().count() == 1 {
                    base.push(surface.clone());
                }
            }
            let bpe = BpeModel::from_parts(base, &merges)?;
            let mut map = Vec::with_capacity(bpe.vocab_size());
            for (bpe_id, surface) in bpe.surfaces().iter().enumerate() {
                let bundle_id = if bpe_id < 256 {
                    byte_ids[bpe_id]
                } else {
                    *text_ids.get(surface).ok_or(BundleParseError::Inconsistent(
                        "merge result missing from the vocabulary",
                    ))?
                };
                map.push(bundle_id);
            }
            (Some(bpe), map)
        }
    };

    Ok(TokenizerBundle {
        variant: config.variant,
        morph_ratio: config.morph_ratio,
        morph_budget: config.morph_budget,
        bpe_budget: config.bpe_budget,
        table,
        model,
        bpe,
        bpe_to_bundle,
        surfaces,
        kinds,
        text_ids,
        byte_ids,
    })
}

fn parse_vocab(source: &str) -> Result<(Vec<String>, Vec<TokenKind>), BundleParseError> {
    let mut surfaces = Vec::new();
    let mut kinds = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let bad = |reason| BundleParseError::Vocab {
            line: line_no,
            reason,
        };
        let mut fields = line.split('\t');
        let id: usize = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| bad("bad id"))?;
        if id != idx {
            return Err(bad("ids must be contiguous from 0"));
        }
        let surface = unescape_field(fields.next().ok_or_else(|| bad("missing surface"))?)
            .map_err(|_| bad("bad escape in surface"))?;
        let kind = match fields.next().ok_or_else(|| bad("missing kind"))? {
            "special" => TokenKind::Special,
            "byte" => TokenKind::Byte(
                parse_byte_surface(&surface).ok_or_else(|| bad("byte token with a non-byte surface"))?,
            ),
            "text" => TokenKind::Text,
            _ => return Err(bad("unknown kind")),
        };
        if fields.next().is_some() {
            return Err(bad("trailing fields"));
        }
        surfaces.push(surface);
        kinds.push(kind);
    }
    Ok((surfaces, kinds))
}

struct ConfigData {
    variant: Variant,
    morph_ratio: f64,
    morph_budget: usize,
    bpe_budget: usize,
}

fn parse_config(source: &str) -> Result<ConfigData, BundleParseError> {
    let bad = |reason| BundleParseError::Config { reason };
    let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
    for line in source.lines() {
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key=value"))?;
        if seen.insert(key, value).is_some() {
            return Err(bad("duplicate key"));
        }
    }
    let mut take = |key: &str| seen.remove(key).ok_or_else(|| bad("missing key"));
    let variant = Variant::parse(take("variant")?).ok_or_else(|| bad("unknown variant"))?;
    let morph_ratio = parse_f64(take("morph-ratio")?).ok_or_else(|| bad("bad morph-ratio"))?;
    if !(morph_ratio > 0.0 && morph_ratio <= 1.0) {
        return Err(bad("morph-ratio out of range"));
    }
    if take("marker")? != String::from(MARKER) {
        return Err(bad("foreign whitespace marker"));
    }
    if take("specials")? != SPECIAL_TOKENS.join(" ") {
        return Err(bad("foreign special tokens"));
    }
    let morph_budget = take("morph-budget")?
        .parse()
        .map_err(|_| bad("bad morph-budget"))?;
    let bpe_budget = take("bpe-budget")?
        .parse()
        .map_err(|_| bad("bad bpe-budget"))?;
    if !seen.is_empty() {
        return Err(bad("unknown key"));
    }
    Ok(ConfigData {
        variant,
        morph_ratio,
        morph_budget,
        bpe_budget,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuildError {
    InvalidRatio,
    VocabTooSmall { specials: usize, requested: usize },
    Table(MorphTableError),
    Bpe(BpeError),
}

impl From<MorphTableError> for BuildError {
    fn from(e: MorphTableError) -> Self {
        BuildError::Table(e)
    }
}

impl From<BpeError> for BuildError {
    fn from(e: BpeError) -> Self {
        BuildError::Bpe(e)
    }
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildError::InvalidRatio => f.write_str("morph ratio must be in (0, 1]"),
            BuildError::VocabTooSmall {
                specials,
                requested,
            } => write!(
                f,
                "total vocab {requested} cannot hold the {specials} special tokens"
            ),
            BuildError::Table(e) => write!(f, "morphtable: {e}"),
            BuildError::Bpe(e) => write!(f, "bpe: {e}"),
        }
    }
}

impl core::error::Error for BuildError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenizerError {
    BadId(u32),
}

impl fmt::Display for TokenizerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenizerError::BadId(id) => write!(f, "token id {id} out of range"),
        }
    }
}

impl core::error::Error for TokenizerError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BundleParseError {
    Vocab { line: usize, reason: &'static str },
    Config { reason: &'static str },
    Table(MorphTableParseError),
    Model(ModelParseError),
    Merges(BpeError),
    Inconsistent(&'static str),
}

impl From<MorphTableParseError> for BundleParseError {
    fn from(e: MorphTableParseError) -> Self {
        BundleParseError::Table(e)
    }
}

impl From<ModelParseError> for BundleParseError {
    fn from(e: ModelParseError) -> Self {
        BundleParseError::Model(e)
    }
}

impl From<BpeError> for BundleParseError {
    fn from(e: BpeError) -> Self {
        BundleParseError::Merges(e)
    }
}

impl fmt::Display for BundleParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BundleParseError::Vocab { line, reason } => {
                write!(f, "bad vocab file (line {line}): {reason}")
            }
            BundleParseError::Config { reason } => write!(f, "bad config file: {reason}"),
            BundleParseError::Table(e) => write!(f, "morphtable file: {e}"),
            BundleParseError::Model(e) => write!(f, "model file: {e}"),
            BundleParseError::Merges(e) => write!(f, "merge file: {e}"),
            BundleParseError::Inconsistent(reason) => write!(f, "inconsistent bundle: {reason}"),
        }
    }
}

impl core::error::Error for BundleParseError {}
