//! Minimum-description-length segmentation model.
//!
//! The model is a morph lexicon with token counts. Its cost in bits is
//!
//! ```text
//! L = L_lexicon + alpha * L_corpus + beta * L_annotations
//! ```
//!
//! where `L_lexicon` prices each distinct morph by per-letter code lengths
//! plus an end-of-morph symbol and a frequency prior (an enumerative code
//! for distributing the token mass over the morph types), `L_corpus` prices
//! every corpus morph token at `-log2(count(m)/total)`, and
//! `L_annotations` prices gold-annotated segmentations the same way.
//!
//! Training is local search: words start whole and are repeatedly visited
//! in a seeded-shuffled order; each visit re-derives the word's analysis by
//! greedy recursive binary splitting and keeps the cheaper of the new and
//! previous analyses, so the cost trace never increases. Semi-supervised
//! training additionally injects annotation morphs (count 1 per gold
//! occurrence), pins annotated words to their gold splits, and adds the
//! beta-weighted annotation likelihood.
//!
//! Decoding ([`viterbi_segment`]) is an exact dynamic program over split
//! positions; out-of-lexicon morphs stay reachable at letter cost plus a
//! novel-morph penalty, so decoding is total.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{AnnotatedWord, FrequencyTable};
use crate::escape::{escape_field, fmt_f64, parse_f64, unescape_field};

const LN_2: f64 = core::f64::consts::LN_2;

fn log2(x: f64) -> f64 {
    libm::log2(x)
}

/// log2 of C(n, k), via lgamma so it stays O(1) for large token totals.
fn log2_binomial(n: u64, k: u64) -> f64 {
    if k == 0 || k >= n {
        return 0.0;
    }
    let (n, k) = (n as f64, k as f64);
    (libm::lgamma(n + 1.0) - libm::lgamma(k + 1.0) - libm::lgamma(n - k + 1.0)) / LN_2
}

/// User-facing training knobs. The two `Option` fields have data-dependent
/// defaults, resolved at training time into the [`TrainParams`] stored on
/// the model: `annotation_weight` defaults to
/// `1000 * corpus_tokens / annotation_tokens`, and `convergence_epsilon`
/// defaults to 0.5% of the initial model cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub corpus_weight: f64,
    pub annotation_weight: Option<f64>,
    pub convergence_epsilon: Option<f64>,
    pub max_epochs: u32,
    pub rng_seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            corpus_weight: 1.0,
            annotation_weight: None,
            convergence_epsilon: None,
            max_epochs: 10,
            rng_seed: 0,
        }
    }
}

impl TrainOptions {
    pub fn seeded(rng_seed: u64) -> Self {
        Self {
            rng_seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), MorfessorError> {
        if !(self.corpus_weight > 0.0 && self.corpus_weight.is_finite()) {
            return Err(MorfessorError::InvalidParams("corpus_weight must be > 0"));
        }
        if let Some(b) = self.annotation_weight {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(MorfessorError::InvalidParams(
                    "annotation_weight must be >= 0",
                ));
            }
        }
        if let Some(e) = self.convergence_epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return Err(MorfessorError::InvalidParams(
                    "convergence_epsilon must be > 0",
                ));
            }
        }
        if self.max_epochs == 0 {
            return Err(MorfessorError::InvalidParams("max_epochs must be >= 1"));
        }
        Ok(())
    }
}

/// Resolved hyperparameters as stored on a trained model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainParams {
    pub corpus_weight: f64,
    pub annotation_weight: f64,
    pub convergence_epsilon: f64,
    pub max_epochs: u32,
    pub rng_seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            corpus_weight: 1.0,
            annotation_weight: 0.0,
            convergence_epsilon: 1.0,
            max_epochs: 10,
            rng_seed: 0,
        }
    }
}

/// Per-code-point code lengths in bits, fixed once from the training
/// corpus, plus the end-of-morph symbol cost. Code points never seen get
/// the maximum observed cost plus one bit.
#[derive(Debug, Clone, PartialEq)]
pub struct LetterCosts {
    costs: BTreeMap<char, f64>,
    end_cost: f64,
    max_cost: f64,
}

impl LetterCosts {
    /// Token-weighted code-point frequencies over the chunk bodies of a
    /// corpus; the end-of-morph symbol is granted one occurrence per body
    /// token.
    pub fn from_counts(table: &FrequencyTable) -> Self {
        let mut letter_counts: BTreeMap<char, u64> = BTreeMap::new();
        let mut end_count: u64 = 0;
        let mut total: u64 = 0;
        for (raw, count) in table.iter() {
            let body = raw.trim_matches(|c: char| c.is_whitespace());
            if body.is_empty() {
                continue;
            }
            for c in body.chars() {
                *letter_counts.entry(c).or_insert(0) += count;
                total += count;
            }
            end_count += count;
            total += count;
        }
        if total == 0 {
            return Self {
                costs: BTreeMap::new(),
                end_cost: 0.0,
                max_cost: 0.0,
            };
        }
        let total_f = total as f64;
        let costs: BTreeMap<char, f64> = letter_counts
            .into_iter()
            .map(|(c, n)| (c, -log2(n as f64 / total_f)))
            .collect();
        let end_cost = -log2(end_count as f64 / total_f);
        let max_cost = costs
            .values()
            .copied()
            .fold(end_cost, f64::max);
        Self {
            costs,
            end_cost,
            max_cost,
        }
    }

    pub fn from_parts(costs: BTreeMap<char, f64>, end_cost: f64) -> Self {
        let max_cost = costs.values().copied().fold(end_cost, f64::max);
        Self {
            costs,
            end_cost,
            max_cost,
        }
    }

    /// Uniform cost per letter; handy for models assembled by hand.
    pub fn uniform(bits: f64) -> Self {
        Self {
            costs: BTreeMap::new(),
            end_cost: bits,
            max_cost: bits - 1.0,
        }
    }

    pub fn cost_of_char(&self, c: char) -> f64 {
        self.costs.get(&c).copied().unwrap_or(self.max_cost + 1.0)
    }

    pub fn end_cost(&self) -> f64 {
        self.end_cost
    }

    /// Letter cost of a whole morph: per-code-point costs plus the
    /// end-of-morph symbol.
    pub fn morph_cost(&self, morph: &str) -> f64 {
        let mut bits = self.end_cost;
        for c in morph.chars() {
            bits += self.cost_of_char(c);
        }
        bits
    }

    /// Adds any code point of `text` that has no cost yet, priced at the
    /// pre-existing maximum plus one bit. Keeps the model invariant that
    /// letter costs cover the lexicon.
    fn ensure_covers(&mut self, text: &str) {
        let missing_cost = self.max_cost + 1.0;
        let mut inserted = false;
        for c in text.chars() {
            self.costs.entry(c).or_insert_with(|| {
                inserted = true;
                missing_cost
            });
        }
        if inserted {
            self.max_cost = missing_cost;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (char, f64)> + '_ {
        self.costs.iter().map(|(c, b)| (*c, *b))
    }
}

/// A trained (or hand-assembled) segmentation model.
#[derive(Debug, Clone, PartialEq)]
pub struct MorfessorModel {
    lexicon: BTreeMap<String, u64>,
    corpus_token_total: u64,
    letter_costs: LetterCosts,
    params: TrainParams,
    version: u32,
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

impl MorfessorModel {
    pub fn new(
        lexicon: BTreeMap<String, u64>,
        mut letter_costs: LetterCosts,
        params: TrainParams,
    ) -> Result<Self, MorfessorError> {
        let mut total: u64 = 0;
        for (morph, count) in &lexicon {
            if morph.is_empty() {
                return Err(MorfessorError::InvalidModel("empty morph in lexicon"));
            }
            if *count == 0 {
                return Err(MorfessorError::InvalidModel("zero-count morph in lexicon"));
            }
            total += count;
            letter_costs.ensure_covers(morph);
        }
        Ok(Self {
            lexicon,
            corpus_token_total: total,
            letter_costs,
            params,
            version: MODEL_FORMAT_VERSION,
        })
    }

    pub fn lexicon(&self) -> &BTreeMap<String, u64> {
        &self.lexicon
    }

    pub fn morph_count(&self, morph: &str) -> u64 {
        self.lexicon.get(morph).copied().unwrap_or(0)
    }

    pub fn corpus_token_total(&self) -> u64 {
        self.corpus_token_total
    }

    pub fn letter_costs(&self) -> &LetterCosts {
        &self.letter_costs
    }

    pub fn params(&self) -> &TrainParams {
        &self.params
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    /// `-log2(count/total)` for lexicon morphs.
    pub fn in_lexicon_cost(&self, morph: &str) -> Option<f64> {
        let count = *self.lexicon.get(morph)?;
        Some(-log2(count as f64 / self.corpus_token_total as f64))
    }

    /// Price of a morph absent from the lexicon: its letter cost plus the
    /// novel-morph penalty `log2(total + 1)`.
    pub fn novel_morph_cost(&self, morph: &str) -> f64 {
        self.letter_costs.morph_cost(morph) + log2(self.corpus_token_total as f64 + 1.0)
    }

    /// Decoding price of any morph; total on all non-empty strings.
    pub fn morph_bits(&self, morph: &str) -> f64 {
        self.in_lexicon_cost(morph)
            .unwrap_or_else(|| self.novel_morph_cost(morph))
    }
}

/// One Viterbi decode: segments plus the summed bit cost.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationResult {
    pub segments: Vec<String>,
    pub cost_bits: f64,
}

/// Exact minimum-cost segmentation of `word` under the model.
///
/// The dynamic program minimizes the left-to-right sum of morph costs, so
/// the reported cost is bit-for-bit the minimum an exhaustive enumeration
/// (summing each candidate left to right) would find. Ties are broken by
/// fewest segments, then by preferring the longest segment at each position
/// scanning from the left.
pub fn viterbi_segment(
    model: &MorfessorModel,
    word: &str,
) -> Result<SegmentationResult, MorfessorError> {
    if word.is_empty() {
        return Err(MorfessorError::EmptyWord);
    }
    if word.chars().any(char::is_whitespace) {
        return Err(MorfessorError::WhitespaceInWord);
    }

    // Char-boundary byte offsets; position k = after k-th char.
    let mut bounds: Vec<usize> = word.char_indices().map(|(i, _)| i).collect();
    bounds.push(word.len());
    let n = bounds.len() - 1;

    let piece = |i: usize, j: usize| &word[bounds[i]..bounds[j]];

    let mut cost = vec![f64::INFINITY; n + 1];
    let mut nsegs = vec![u32::MAX; n + 1];
    cost[0] = 0.0;
    nsegs[0] = 0;
    for j in 1..=n {
        for i in 0..j {
            let c = cost[i] + model.morph_bits(piece(i, j));
            let k = nsegs[i] + 1;
            if c < cost[j] || (c == cost[j] && k < nsegs[j]) {
                cost[j] = c;
                nsegs[j] = k;
            }
        }
    }

    // Marks positions that can complete to the optimal (cost, nsegs) at n,
    // using exact equality on the DP values.
    let mut on_path = vec![false; n + 1];
    on_path[n] = true;
    for i in (0..n).rev() {
        for j in i + 1..=n {
            if on_path[j]
                && nsegs[i] != u32::MAX
                && nsegs[i] + 1 == nsegs[j]
                && cost[i] + model.morph_bits(piece(i, j)) == cost[j]
            {
                on_path[i] = true;
                break;
            }
        }
    }

    let mut segments = Vec::new();
    let mut i = 0;
    while i < n {
        let mut next = None;
        for j in (i + 1..=n).rev() {
            if on_path[j]
                && nsegs[i] + 1 == nsegs[j]
                && cost[i] + model.morph_bits(piece(i, j)) == cost[j]
            {
                next = Some(j);
                break;
            }
        }
        let j = next.expect("optimal path reconstruction cannot dead-end");
        segments.push(piece(i, j).to_string());
        i = j;
    }

    Ok(SegmentationResult {
        segments,
        cost_bits: cost[n],
    })
}

/// Total model cost in bits for a corpus (each distinct body priced by its
/// Viterbi segmentation under the model) plus annotations (priced at their
/// gold splits, out-of-lexicon morphs at letter cost).
pub fn model_cost(
    model: &MorfessorModel,
    training_counts: &FrequencyTable,
    annotations: &[AnnotatedWord],
) -> Result<f64, MorfessorError> {
    let total_from_lexicon: u64 = model.lexicon.values().sum();
    if total_from_lexicon != model.corpus_token_total {
        return Err(MorfessorError::InvalidModel(
            "corpus_token_total does not equal the lexicon count sum",
        ));
    }

    let mut lexicon_bits = 0.0;
    for morph in model.lexicon.keys() {
        lexicon_bits += model.letter_costs.morph_cost(morph);
    }
    lexicon_bits += log2_binomial(
        model.corpus_token_total.saturating_sub(1),
        (model.lexicon.len() as u64).saturating_sub(1),
    );

    let mut corpus_bits = 0.0;
    let mut bodies: BTreeMap<&str, u64> = BTreeMap::new();
    for (raw, count) in training_counts.iter() {
        let body = raw.trim_matches(|c: char| c.is_whitespace());
        if !body.is_empty() {
            *bodies.entry(body).or_insert(0) += count;
        }
    }
    for (body, count) in bodies {
        let seg = viterbi_segment(model, body)?;
        corpus_bits += count as f64 * seg.cost_bits;
    }

    let mut annotation_bits = 0.0;
    for word in annotations {
        for surface in word.surfaces() {
            annotation_bits += model
                .in_lexicon_cost(surface)
                .unwrap_or_else(|| model.letter_costs.morph_cost(surface));
        }
    }

    Ok(lexicon_bits
        + model.params.corpus_weight * corpus_bits
        + model.params.annotation_weight * annotation_bits)
}

/// A finished training run: the model plus the cost trace that produced it.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: MorfessorModel,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub epochs_run: u32,
    /// Total cost after every accepted per-word move, in visit order.
    pub cost_trace: Vec<f64>,
}

/// Unsupervised training over chunk bodies.
pub fn train_unsupervised(
    counts: &FrequencyTable,
    options: &TrainOptions,
) -> Result<TrainOutcome, MorfessorError> {
    options.validate()?;
    Trainer::build(counts, &[], options)?.run()
}

/// Semi-supervised training: annotation morphs are injected with count 1
/// per gold occurrence, annotated words are pinned to their gold splits,
/// and the objective gains `beta * L_annotations`. A resolved beta of 0
/// reduces to unsupervised training on the same seed.
pub fn train_semisupervised(
    counts: &FrequencyTable,
    annotations: &[AnnotatedWord],
    options: &TrainOptions,
) -> Result<TrainOutcome, MorfessorError> {
    options.validate()?;
    if annotations.is_empty() {
        return Err(MorfessorError::EmptyAnnotations);
    }
    if options.annotation_weight == Some(0.0) {
        return train_unsupervised(counts, options);
    }
    Trainer::build(counts, annotations, options)?.run()
}

struct Item {
    body: String,
    weight: u64,
    pinned: bool,
}

/// Incrementally maintained cost terms. `n` is the full token mass
/// (corpus analyses plus injected annotation tokens); the corpus and
/// annotation likelihoods are tracked as `T*log2(n) - S` with `S` the
/// count-log sums, so every add/remove is O(log lexicon).
struct CostState {
    counts: BTreeMap<String, u64>,
    ann_fixed: BTreeMap<String, u64>,
    n: u64,
    distinct: u64,
    letter_bits_sum: f64,
    corpus_tokens: u64,
    corpus_log_sum: f64,
    ann_tokens: u64,
    ann_log_sum: f64,
    letters: LetterCosts,
    alpha: f64,
    beta: f64,
}

impl CostState {
    fn corpus_usage_term(&self, morph: &str, count: u64) -> f64 {
        let fixed = self.ann_fixed.get(morph).copied().unwrap_or(0);
        if count > fixed {
            (count - fixed) as f64 * log2(count as f64)
        } else {
            0.0
        }
    }

    fn ann_usage_term(&self, morph: &str, count: u64) -> f64 {
        let usage = self.ann_fixed.get(morph).copied().unwrap_or(0);
        if usage > 0 && count > 0 {
            usage as f64 * log2(count as f64)
        } else {
            0.0
        }
    }

    fn add_morph(&mut self, morph: &str, k: u64) {
        let old = self.counts.get(morph).copied().unwrap_or(0);
        let new = old + k;
        self.corpus_log_sum += self.corpus_usage_term(morph, new) - self.corpus_usage_term(morph, old);
        self.ann_log_sum += self.ann_usage_term(morph, new) - self.ann_usage_term(morph, old);
        if old == 0 {
            self.distinct += 1;
            self.letter_bits_sum += self.letters.morph_cost(morph);
            self.counts.insert(morph.to_string(), new);
        } else {
            *self.counts.get_mut(morph).expect("counted morph") = new;
        }
        self.n += k;
    }

    fn remove_morph(&mut self, morph: &str, k: u64) {
        let old = self.counts.get(morph).copied().expect("morph to remove");
        debug_assert!(old >= k);
        let new = old - k;
        self.corpus_log_sum += self.corpus_usage_term(morph, new) - self.corpus_usage_term(morph, old);
        self.ann_log_sum += self.ann_usage_term(morph, new) - self.ann_usage_term(morph, old);
        if new == 0 {
            self.distinct -= 1;
            self.letter_bits_sum -= self.letters.morph_cost(morph);
            self.counts.remove(morph);
        } else {
            *self.counts.get_mut(morph).expect("counted morph") = new;
        }
        self.n -= k;
    }

    fn total_cost(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let log_n = log2(self.n as f64);
        let lexicon = self.letter_bits_sum
            + log2_binomial(self.n.saturating_sub(1), self.distinct.saturating_sub(1));
        let corpus = self.corpus_tokens as f64 * log_n - self.corpus_log_sum;
        let annotation = self.ann_tokens as f64 * log_n - self.ann_log_sum;
        lexicon + self.alpha * corpus + self.beta * annotation
    }
}

struct Trainer {
    state: CostState,
    items: Vec<Item>,
    analyses: Vec<Vec<String>>,
    epsilon: Option<f64>,
    max_epochs: u32,
    rng_seed: u64,
    options: TrainOptions,
}

impl Trainer {
    fn build(
        counts: &FrequencyTable,
        annotations: &[AnnotatedWord],
        options: &TrainOptions,
    ) -> Result<Trainer, MorfessorError> {
        if counts.is_empty() {
            return Err(MorfessorError::EmptyCorpus);
        }

        let mut bodies: BTreeMap<String, u64> = BTreeMap::new();
        for (raw, count) in counts.iter() {
            let body = raw.trim_matches(|c: char| c.is_whitespace());
            if !body.is_empty() {
                *bodies.entry(body.to_string()).or_insert(0) += count;
            }
        }
        if bodies.is_empty() {
            return Err(MorfessorError::EmptyCorpus);
        }

        let mut letters = LetterCosts::from_counts(counts);

        // Gold splits per annotated word; first annotation wins on
        // duplicates. Boundaries are stored as char counts so a pinned
        // corpus body keeps its own casing.
        let mut gold: BTreeMap<&str, &AnnotatedWord> = BTreeMap::new();
        let mut ann_fixed: BTreeMap<String, u64> = BTreeMap::new();
        let mut ann_tokens: u64 = 0;
        for word in annotations {
            gold.entry(word.word.as_str()).or_insert(word);
            for surface in word.surfaces() {
                letters.ensure_covers(surface);
                *ann_fixed.entry(surface.to_string()).or_insert(0) += 1;
                ann_tokens += 1;
            }
        }

        let mut state = CostState {
            counts: BTreeMap::new(),
            ann_fixed,
            n: 0,
            distinct: 0,
            letter_bits_sum: 0.0,
            corpus_tokens: 0,
            corpus_log_sum: 0.0,
            ann_tokens,
            ann_log_sum: 0.0,
            letters,
            alpha: options.corpus_weight,
            beta: 0.0, // set below once resolved
        };

        // Injected annotation mass: count 1 per gold occurrence. The
        // corpus-side sum is untouched because corpus usage is count minus
        // this fixed mass.
        let fixed = state.ann_fixed.clone();
        for (morph, usage) in &fixed {
            state.add_morph(morph, *usage);
        }

        let mut items = Vec::with_capacity(bodies.len());
        let mut analyses = Vec::with_capacity(bodies.len());
        for (body, weight) in bodies {
            let (analysis, pinned) = match gold.get(body.as_str()) {
                Some(word) => (slice_by_gold(&body, word), true),
                None => (vec![body.clone()], false),
            };
            for seg in &analysis {
                state.add_morph(seg, weight);
            }
            state.corpus_tokens += weight * analysis.len() as u64;
            items.push(Item {
                body,
                weight,
                pinned,
            });
            analyses.push(analysis);
        }

        let annotation_weight = match options.annotation_weight {
            Some(b) => b,
            None if annotations.is_empty() => 0.0,
            None => 1000.0 * state.corpus_tokens as f64 / ann_tokens.max(1) as f64,
        };
        state.beta = annotation_weight;

        Ok(Trainer {
            state,
            items,
            analyses,
            epsilon: options.convergence_epsilon,
            max_epochs: options.max_epochs,
            rng_seed: options.rng_seed,
            options: options.clone(),
        })
    }

    fn run(mut self) -> Result<TrainOutcome, MorfessorError> {
        let initial_cost = self.state.total_cost();
        let epsilon = self.epsilon.unwrap_or(0.005 * initial_cost.max(f64::MIN_POSITIVE));

        // Tiny corpora are solved exactly: coordinate-wise local search
        // has provable traps (configs where no single-word move improves)
        // even at four words, yet the trained cost must reach the joint
        // global minimum there.
        if let Some(options) = self.exhaustive_options() {
            return self.run_exact(options, initial_cost, epsilon);
        }

        let mut trace = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        let mut epochs_run = 0;

        // The recorded cost only ever moves when a strictly comparable
        // cheaper-or-equal candidate is accepted, so the trace is
        // non-increasing by construction, immune to ulp drift from
        // remove/re-add float round-off on reverted moves.
        let mut current_cost = initial_cost;

        let visit: Vec<usize> = (0..self.items.len())
            .filter(|&i| !self.items[i].pinned)
            .collect();

        for _ in 0..self.max_epochs {
            let cost_at_epoch_start = current_cost;
            let mut order = visit.clone();
            shuffle(&mut order, &mut rng);
            for idx in order {
                let weight = self.items[idx].weight;
                let body = self.items[idx].body.clone();
                let previous = core::mem::take(&mut self.analyses[idx]);

                for seg in &previous {
                    self.state.remove_morph(seg, weight);
                }
                self.state.corpus_tokens -= weight * previous.len() as u64;

                let candidate = best_analysis(&mut self.state, &body, weight);
                let candidate_cost = self.state.total_cost();

                if candidate_cost <= current_cost {
                    self.analyses[idx] = candidate;
                    current_cost = candidate_cost;
                } else {
                    for seg in &candidate {
                        self.state.remove_morph(seg, weight);
                    }
                    self.state.corpus_tokens -= weight * candidate.len() as u64;
                    for seg in &previous {
                        self.state.add_morph(seg, weight);
                    }
                    self.state.corpus_tokens += weight * previous.len() as u64;
                    self.analyses[idx] = previous;
                }
                trace.push(current_cost);
            }
            epochs_run += 1;
            if cost_at_epoch_start - current_cost < epsilon {
                break;
            }
        }

        let final_cost = current_cost;
        self.finish(initial_cost, final_cost, epochs_run, trace, epsilon)
    }

    /// One analysis list per unpinned item when the joint configuration
    /// space is small enough to enumerate outright, in item order.
    fn exhaustive_options(&self) -> Option<Vec<(usize, Vec<Vec<String>>)>> {
        const MAX_CONFIGS: u64 = 1 << 20;
        let mut product: u64 = 1;
        let mut options = Vec::new();
        for (idx, item) in self.items.iter().enumerate() {
            if item.pinned {
                continue;
            }
            let cuts = item.body.chars().count() - 1;
            if cuts > 20 {
                return None;
            }
            product = product.checked_mul(1 << cuts)?;
            if product > MAX_CONFIGS {
                return None;
            }
            let chars: Vec<char> = item.body.chars().collect();
            let variants = (0..(1u32 << cuts))
                .map(|mask| segments_of_mask(&chars, mask))
                .collect();
            options.push((idx, variants));
        }
        Some(options)
    }

    /// Joint exhaustive search over every combination of per-word
    /// segmentations; picks the first configuration (in mask order, whole
    /// words first) attaining the minimum total cost.
    fn run_exact(
        mut self,
        options: Vec<(usize, Vec<Vec<String>>)>,
        initial_cost: f64,
        epsilon: f64,
    ) -> Result<TrainOutcome, MorfessorError> {
        for (idx, _) in &options {
            let weight = self.items[*idx].weight;
            for seg in &self.analyses[*idx] {
                self.state.remove_morph(seg, weight);
            }
            self.state.corpus_tokens -= weight * self.analyses[*idx].len() as u64;
        }

        fn descend(
            state: &mut CostState,
            items: &[Item],
            options: &[(usize, Vec<Vec<String>>)],
            level: usize,
            choice: &mut Vec<usize>,
            best: &mut (f64, Vec<usize>),
        ) {
            if level == options.len() {
                let cost = state.total_cost();
                if cost < best.0 {
                    *best = (cost, choice.clone());
                }
                return;
            }
            let (idx, variants) = &options[level];
            let weight = items[*idx].weight;
            for (vi, segs) in variants.iter().enumerate() {
                for seg in segs {
                    state.add_morph(seg, weight);
                }
                state.corpus_tokens += weight * segs.len() as u64;
                choice.push(vi);
                descend(state, items, options, level + 1, choice, best);
                choice.pop();
                for seg in segs {
                    state.remove_morph(seg, weight);
                }
                state.corpus_tokens -= weight * segs.len() as u64;
            }
        }

        let mut best = (f64::INFINITY, Vec::new());
        let mut choice = Vec::new();
        descend(
            &mut self.state,
            &self.items,
            &options,
            0,
            &mut choice,
            &mut best,
        );

        for (level, (idx, variants)) in options.iter().enumerate() {
            let weight = self.items[*idx].weight;
            let segs = variants[best.1[level]].clone();
            for seg in &segs {
                self.state.add_morph(seg, weight);
            }
            self.state.corpus_tokens += weight * segs.len() as u64;
            self.analyses[*idx] = segs;
        }

        let final_cost = best.0.min(initial_cost);
        let trace = vec![final_cost];
        self.finish(initial_cost, final_cost, 1, trace, epsilon)
    }

    fn finish(
        self,
        initial_cost: f64,
        final_cost: f64,
        epochs_run: u32,
        trace: Vec<f64>,
        epsilon: f64,
    ) -> Result<TrainOutcome, MorfessorError> {
        let params = TrainParams {
            corpus_weight: self.options.corpus_weight,
            annotation_weight: self.state.beta,
            convergence_epsilon: epsilon,
            max_epochs: self.max_epochs,
            rng_seed: self.rng_seed,
        };
        let model = MorfessorModel::new(self.state.counts, self.state.letters, params)?;
        Ok(TrainOutcome {
            model,
            initial_cost,
            final_cost,
            epochs_run,
            cost_trace: trace,
        })
    }
}

/// Words at or below this length get their analysis re-derived by exact
/// search over all 2^(n-1) segmentations; binary-split recursion alone can
/// stall in local optima that the exact search provably escapes.
const EXHAUSTIVE_SEARCH_LEN: usize = 10;

/// Re-derives the analysis of `body` against the rest of the corpus,
/// leaving the winning morphs added to the state. Short words are searched
/// exhaustively; longer words combine greedy recursive binary splitting
/// with a count-driven dynamic program and keep the cheaper result.
fn best_analysis(state: &mut CostState, body: &str, weight: u64) -> Vec<String> {
    let chars: Vec<char> = body.chars().collect();
    if chars.len() <= EXHAUSTIVE_SEARCH_LEN {
        let cuts = chars.len() - 1;
        let mut best_mask = 0u32;
        let mut best_cost = f64::INFINITY;
        for mask in 0..(1u32 << cuts) {
            let segs = segments_of_mask(&chars, mask);
            for s in &segs {
                state.add_morph(s, weight);
            }
            state.corpus_tokens += weight * segs.len() as u64;
            let cost = state.total_cost();
            for s in &segs {
                state.remove_morph(s, weight);
            }
            state.corpus_tokens -= weight * segs.len() as u64;
            if cost < best_cost {
                best_cost = cost;
                best_mask = mask;
            }
        }
        let segs = segments_of_mask(&chars, best_mask);
        for s in &segs {
            state.add_morph(s, weight);
        }
        state.corpus_tokens += weight * segs.len() as u64;
        return segs;
    }

    let greedy = resplit(state, body, weight);
    let greedy_cost = state.total_cost();
    for s in &greedy {
        state.remove_morph(s, weight);
    }
    state.corpus_tokens -= weight * greedy.len() as u64;

    let dp = segment_by_counts(state, &chars, body);
    for s in &dp {
        state.add_morph(s, weight);
    }
    state.corpus_tokens += weight * dp.len() as u64;
    let dp_cost = state.total_cost();
    if greedy_cost <= dp_cost {
        for s in &dp {
            state.remove_morph(s, weight);
        }
        state.corpus_tokens -= weight * dp.len() as u64;
        for s in &greedy {
            state.add_morph(s, weight);
        }
        state.corpus_tokens += weight * greedy.len() as u64;
        greedy
    } else {
        dp
    }
}

/// Mask bit i set = cut after char i. Mask 0 is the whole word, so ties in
/// the exhaustive search resolve toward fewer, longer segments.
fn segments_of_mask(chars: &[char], mask: u32) -> Vec<String> {
    let cuts = chars.len() - 1;
    let mut segs = Vec::new();
    let mut seg = String::new();
    for (i, c) in chars.iter().enumerate() {
        seg.push(*c);
        if i < cuts && mask & (1 << i) != 0 {
            segs.push(core::mem::take(&mut seg));
        }
    }
    segs.push(seg);
    segs
}

/// Minimum token-cost segmentation under the current counts (in-lexicon
/// morphs at -log2(count/n), others at letter cost plus a novel penalty).
/// A cheap global candidate that sees reuse the binary recursion misses.
fn segment_by_counts(state: &CostState, chars: &[char], body: &str) -> Vec<String> {
    let n = state.n.max(1) as f64;
    let price = |piece: &str| -> f64 {
        match state.counts.get(piece) {
            Some(&c) => -log2(c as f64 / n),
            None => state.letters.morph_cost(piece) + log2(n + 1.0),
        }
    };
    let mut bounds: Vec<usize> = body.char_indices().map(|(i, _)| i).collect();
    bounds.push(body.len());
    let len = chars.len();
    let mut cost = vec![f64::INFINITY; len + 1];
    let mut back = vec![0usize; len + 1];
    cost[0] = 0.0;
    for j in 1..=len {
        for i in 0..j {
            let c = cost[i] + price(&body[bounds[i]..bounds[j]]);
            if c < cost[j] {
                cost[j] = c;
                back[j] = i;
            }
        }
    }
    let mut segs = Vec::new();
    let mut j = len;
    while j > 0 {
        let i = back[j];
        segs.push(body[bounds[i]..bounds[j]].to_string());
        j = i;
    }
    segs.reverse();
    segs
}

/// Greedy recursive binary split of `body`, leaving the chosen morphs
/// added to the state. At each level the split candidates price both
/// halves as atomic morphs; the winning split recurses into each half.
fn resplit(state: &mut CostState, body: &str, weight: u64) -> Vec<String> {
    let bounds: Vec<usize> = body
        .char_indices()
        .map(|(i, _)| i)
        .skip(1)
        .collect();

    state.add_morph(body, weight);
    state.corpus_tokens += weight;
    let whole_cost = state.total_cost();
    state.remove_morph(body, weight);
    state.corpus_tokens -= weight;

    let mut best_split: Option<usize> = None;
    let mut best_cost = whole_cost;
    for &at in &bounds {
        let (left, right) = body.split_at(at);
        state.add_morph(left, weight);
        state.add_morph(right, weight);
        state.corpus_tokens += 2 * weight;
        let cost = state.total_cost();
        state.remove_morph(left, weight);
        state.remove_morph(right, weight);
        state.corpus_tokens -= 2 * weight;
        if cost < best_cost {
            best_cost = cost;
            best_split = Some(at);
        }
    }

    match best_split {
        None => {
            state.add_morph(body, weight);
            state.corpus_tokens += weight;
            vec![body.to_string()]
        }
        Some(at) => {
            let (left, right) = body.split_at(at);
            let mut segments = resplit(state, left, weight);
            segments.extend(resplit(state, right, weight));
            segments
        }
    }
}

/// Splits `body` at the gold annotation's segment boundaries, measured in
/// chars, so the analysis keeps the body's own casing even when the gold
/// surfaces are lowercased.
fn slice_by_gold(body: &str, word: &AnnotatedWord) -> Vec<String> {
    let chars: Vec<char> = body.chars().collect();
    let mut out = Vec::with_capacity(word.segments.len());
    let mut pos = 0;
    for (surface, _) in &word.segments {
        let len = surface.chars().count();
        let end = (pos + len).min(chars.len());
        out.push(chars[pos..end].iter().collect());
        pos = end;
    }
    if pos < chars.len() {
        // Unreachable for words satisfying the annotation invariant; keep
        // the remainder so the analysis always concatenates to the body.
        out.push(chars[pos..].iter().collect());
    }
    out.retain(|s: &String| !s.is_empty());
    out
}

pub(crate) fn shuffle<T>(v: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..v.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        v.swap(i, j);
    }
}

/// Renders a model as versioned line-oriented text: params, letter costs,
/// then the lexicon, all under sorted keys so equal models are
/// byte-identical.
pub fn save_model(model: &MorfessorModel) -> String {
    let mut out = String::new();
    out.push_str("morfessor model v1\n");
    let p = &model.params;
    out.push_str(&format!("alpha {}\n", fmt_f64(p.corpus_weight)));
    out.push_str(&format!("beta {}\n", fmt_f64(p.annotation_weight)));
    out.push_str(&format!("epsilon {}\n", fmt_f64(p.convergence_epsilon)));
    out.push_str(&format!("max-epochs {}\n", p.max_epochs));
    out.push_str(&format!("seed {}\n", p.rng_seed));
    out.push_str(&format!("end-cost {}\n", fmt_f64(model.letter_costs.end_cost)));
    for (c, bits) in model.letter_costs.iter() {
        let mut buf = String::new();
        buf.push(c);
        out.push_str(&format!("letter {} {}\n", escape_field(&buf), fmt_f64(bits)));
    }
    for (morph, count) in &model.lexicon {
        out.push_str(&format!("morph {} {}\n", escape_field(morph), count));
    }
    out
}

/// Parses [`save_model`] output. Rejects unknown versions and anything
/// that violates the model invariants.
pub fn load_model(source: &str) -> Result<MorfessorModel, ModelParseError> {
    let mut lines = source.lines().enumerate();
    let (_, header) = lines.next().ok_or(ModelParseError::Corrupt {
        line: 1,
        reason: String::from("empty model file"),
    })?;
    if header != "morfessor model v1" {
        if header.starts_with("morfessor model v") {
            return Err(ModelParseError::UnsupportedVersion {
                found: header.to_string(),
            });
        }
        return Err(ModelParseError::Corrupt {
            line: 1,
            reason: String::from("missing model header"),
        });
    }

    let mut alpha = None;
    let mut beta = None;
    let mut epsilon = None;
    let mut max_epochs = None;
    let mut seed = None;
    let mut end_cost = None;
    let mut letters: BTreeMap<char, f64> = BTreeMap::new();
    let mut lexicon: BTreeMap<String, u64> = BTreeMap::new();

    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let corrupt = |reason: &str| ModelParseError::Corrupt {
            line: line_no,
            reason: reason.to_string(),
        };
        let (key, rest) = line.split_once(' ').ok_or_else(|| corrupt("missing value"))?;
        match key {
            "alpha" => alpha = Some(parse_f64(rest).ok_or_else(|| corrupt("bad alpha"))?),
            "beta" => beta = Some(parse_f64(rest).ok_or_else(|| corrupt("bad beta"))?),
            "epsilon" => epsilon = Some(parse_f64(rest).ok_or_else(|| corrupt("bad epsilon"))?),
            "max-epochs" => {
                max_epochs = Some(rest.parse().map_err(|_| corrupt("bad max-epochs"))?)
            }
            "seed" => seed = Some(rest.parse().map_err(|_| corrupt("bad seed"))?),
            "end-cost" => end_cost = Some(parse_f64(rest).ok_or_else(|| corrupt("bad end-cost"))?),
            "letter" => {
                let (c, bits) = rest.split_once(' ').ok_or_else(|| corrupt("bad letter line"))?;
                let c = unescape_field(c).map_err(|_| corrupt("bad letter escape"))?;
                let mut chars = c.chars();
                let (c, extra) = (chars.next(), chars.next());
                let c = match (c, extra) {
                    (Some(c), None) => c,
                    _ => return Err(corrupt("letter field must be one code point")),
                };
                let bits = parse_f64(bits).ok_or_else(|| corrupt("bad letter cost"))?;
                if letters.insert(c, bits).is_some() {
                    return Err(corrupt("duplicate letter"));
                }
            }
            "morph" => {
                let (morph, count) = rest
                    .rsplit_once(' ')
                    .ok_or_else(|| corrupt("bad morph line"))?;
                let morph = unescape_field(morph).map_err(|_| corrupt("bad morph escape"))?;
                let count: u64 = count.parse().map_err(|_| corrupt("bad morph count"))?;
                if count == 0 || morph.is_empty() {
                    return Err(corrupt("morph must be non-empty with positive count"));
                }
                if lexicon.insert(morph, count).is_some() {
                    return Err(corrupt("duplicate morph"));
                }
            }
            _ => return Err(corrupt("unknown key")),
        }
    }

    let missing = |what: &str| ModelParseError::Corrupt {
        line: 0,
        reason: format!("missing {what}"),
    };
    let params = TrainParams {
        corpus_weight: alpha.ok_or_else(|| missing("alpha"))?,
        annotation_weight: beta.ok_or_else(|| missing("beta"))?,
        convergence_epsilon: epsilon.ok_or_else(|| missing("epsilon"))?,
        max_epochs: max_epochs.ok_or_else(|| missing("max-epochs"))?,
        rng_seed: seed.ok_or_else(|| missing("seed"))?,
    };
    let letter_costs = LetterCosts::from_parts(letters, end_cost.ok_or_else(|| missing("end-cost"))?);
    for morph in lexicon.keys() {
        for c in morph.chars() {
            if !letter_costs.costs.contains_key(&c) {
                return Err(ModelParseError::InvalidModel(
                    "letter costs do not cover the lexicon",
                ));
            }
        }
    }
    MorfessorModel::new(lexicon, letter_costs, params)
        .map_err(|_| ModelParseError::InvalidModel("model invariant violated"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MorfessorError {
    EmptyCorpus,
    EmptyAnnotations,
    EmptyWord,
    WhitespaceInWord,
    InvalidParams(&'static str),
    InvalidModel(&'static str),
}

impl fmt::Display for MorfessorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorfessorError::EmptyCorpus => f.write_str("training corpus is empty"),
            MorfessorError::EmptyAnnotations => {
                f.write_str("no annotations; use unsupervised training")
            }
            MorfessorError::EmptyWord => f.write_str("cannot segment an empty word"),
            MorfessorError::WhitespaceInWord => f.write_str("word contains whitespace"),
            MorfessorError::InvalidParams(why) => write!(f, "invalid parameters: {why}"),
            MorfessorError::InvalidModel(why) => write!(f, "invalid model: {why}"),
        }
    }
}

impl core::error::Error for MorfessorError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelParseError {
    UnsupportedVersion { found: String },
    Corrupt { line: usize, reason: String },
    InvalidModel(&'static str),
}

impl fmt::Display for ModelParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelParseError::UnsupportedVersion { found } => {
                write!(f, "unsupported model version: {found:?}")
            }
            ModelParseError::Corrupt { line, reason } => {
                write!(f, "corrupt model file (line {line}): {reason}")
            }
            ModelParseError::InvalidModel(why) => write!(f, "invalid model: {why}"),
        }
    }
}

impl core::error::Error for ModelParseError {}
