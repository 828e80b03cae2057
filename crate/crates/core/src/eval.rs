//! Scoring and measurement: segmentation quality against gold annotations,
//! encoding efficiency of a token stream under an add-k n-gram language
//! model, and the annotation-budget sweep that retrains the segmentation
//! model at increasing annotation counts.
//!
//! Matching conventions, fixed across the toolkit and documented in every
//! rendered report header:
//!
//! * A word's match count is the size of the multiset intersection of its
//!   predicted and gold segment surfaces after case folding. Positions are
//!   ignored unless the strict variant is used, and segment tags are never
//!   consulted.
//! * Precision and recall are micro-averaged: matched, predicted and gold
//!   segment totals are summed over all words before dividing.
//! * `accuracy` is the mean over words of `match / max(|predicted|, |gold|)`.
//! * `exact_match_rate` is the fraction of words whose predicted surfaces
//!   equal the gold surfaces as ordered, case-folded lists.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{fold_case, AnnotatedWord, FrequencyTable, MorphCategory};
use crate::morfessor::{
    shuffle, train_semisupervised, train_unsupervised, viterbi_segment, MorfessorError,
    TrainOptions,
};

/// Micro-averaged scores for one word category.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of gold words in the category.
    pub support: usize,
}

/// Segmentation quality over a gold annotation set.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub exact_match_rate: f64,
    /// Scores per word category, for categories with at least one gold word.
    /// Supports sum to `word_count`.
    pub per_category: BTreeMap<MorphCategory, CategoryScore>,
    pub word_count: usize,
}

/// Encoding efficiency of a scored token stream.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingEfficiency {
    /// Total negative base-2 log probability.
    pub total_bits: f64,
    pub n_tokens: usize,
    pub n_characters: usize,
    /// Bits per character: `total_bits / n_characters`.
    pub bpc: f64,
    /// Bits per token: `total_bits / n_tokens`.
    pub bpt: f64,
}

/// One row of an annotation-budget sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub annotation_count: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    /// The gold annotation list is empty.
    EmptyGold,
    /// A gold word has no entry in the predictions map.
    MissingPrediction(String),
    /// A log probability is positive or not finite.
    BadLogProb(f64),
    /// No token log probabilities were supplied.
    EmptyLogProbs,
    /// Efficiency is undefined over zero characters.
    ZeroCharacters,
    /// Language model order outside {1, 2}.
    UnknownOrder(u8),
    /// The add-k smoothing constant must be finite and positive.
    BadSmoothing(f64),
    /// The training token stream is empty.
    EmptyStream,
    /// A token id is outside the declared vocabulary.
    TokenOutOfRange { id: u32, vocab_size: usize },
    /// A sweep ratio exceeds the number of available annotations.
    RatioOutOfRange { requested: usize, available: usize },
    /// A holdout word also appears in the annotation set.
    OverlappingHoldout(String),
    /// The sweep holdout is empty.
    EmptyHoldout,
    /// Training or segmentation failed inside a sweep.
    Train(MorfessorError),
}

impl core::fmt::Display for EvalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EvalError::EmptyGold => write!(f, "gold annotation list is empty"),
            EvalError::MissingPrediction(w) => write!(f, "no prediction for gold word {w:?}"),
            EvalError::BadLogProb(v) => write!(f, "log probability {v} is not in (-inf, 0]"),
            EvalError::EmptyLogProbs => write!(f, "no token log probabilities supplied"),
            EvalError::ZeroCharacters => write!(f, "efficiency is undefined over 0 characters"),
            EvalError::UnknownOrder(n) => write!(f, "unsupported n-gram order {n}, expected 1 or 2"),
            EvalError::BadSmoothing(k) => write!(f, "smoothing constant {k} must be finite and > 0"),
            EvalError::EmptyStream => write!(f, "token stream is empty"),
            EvalError::TokenOutOfRange { id, vocab_size } => {
                write!(f, "token id {id} outside vocabulary of size {vocab_size}")
            }
            EvalError::RatioOutOfRange {
                requested,
                available,
            } => write!(
                f,
                "sweep requests {requested} annotations but only {available} exist"
            ),
            EvalError::OverlappingHoldout(w) => {
                write!(f, "holdout word {w:?} also appears in the annotations")
            }
            EvalError::EmptyHoldout => write!(f, "sweep holdout is empty"),
            EvalError::Train(e) => write!(f, "sweep training failed: {e}"),
        }
    }
}

impl core::error::Error for EvalError {}

impl From<MorfessorError> for EvalError {
    fn from(e: MorfessorError) -> Self {
        EvalError::Train(e)
    }
}

/// Scores predictions against gold annotations with position-insensitive
/// (multiset) matching. `predicted` maps each gold word to its predicted
/// segment surfaces; extra entries are ignored, missing ones are an error.
pub fn score_segmentations(
    gold: &[AnnotatedWord],
    predicted: &BTreeMap<String, Vec<String>>,
) -> Result<SegmentationReport, EvalError> {
    score_with(gold, predicted, false)
}

/// Position-sensitive variant: a predicted segment only matches the gold
/// segment at the same index. All other definitions are unchanged.
pub fn score_segmentations_strict(
    gold: &[AnnotatedWord],
    predicted: &BTreeMap<String, Vec<String>>,
) -> Result<SegmentationReport, EvalError> {
    score_with(gold, predicted, true)
}

#[derive(Default)]
struct Tally {
    matched: u64,
    predicted: u64,
    gold: u64,
    words: u64,
    accuracy_sum: f64,
    exact: u64,
}

impl Tally {
    fn precision(&self) -> f64 {
        div(self.matched as f64, self.predicted as f64)
    }

    fn recall(&self) -> f64 {
        div(self.matched as f64, self.gold as f64)
    }

    fn f1(&self) -> f64 {
        harmonic(self.precision(), self.recall())
    }
}

fn div(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn multiset_overlap(a: &[String], b: &[String]) -> usize {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in a {
        *counts.entry(s.as_str()).or_insert(0) += 1;
    }
    let mut shared = 0;
    for s in b {
        if let Some(n) = counts.get_mut(s.as_str()) {
            if *n > 0 {
                *n -= 1;
                shared += 1;
            }
        }
    }
    shared
}

fn score_with(
    gold: &[AnnotatedWord],
    predicted: &BTreeMap<String, Vec<String>>,
    positional: bool,
) -> Result<SegmentationReport, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::EmptyGold);
    }

    let mut overall = Tally::default();
    let mut by_category: BTreeMap<MorphCategory, Tally> = BTreeMap::new();

    for word in gold {
        let pred = predicted
            .get(&word.word)
            .ok_or_else(|| EvalError::MissingPrediction(word.word.clone()))?;
        let gold_surfaces: Vec<String> = word.surfaces().map(fold_case).collect();
        let pred_surfaces: Vec<String> = pred.iter().map(|s| fold_case(s)).collect();

        let matched = if positional {
            gold_surfaces
                .iter()
                .zip(&pred_surfaces)
                .filter(|(g, p)| g == p)
                .count()
        } else {
            multiset_overlap(&gold_surfaces, &pred_surfaces)
        };
        // Gold segment lists are non-empty, so the denominator is positive.
        let widest = gold_surfaces.len().max(pred_surfaces.len());
        let accuracy = matched as f64 / widest as f64;
        let exact = gold_surfaces == pred_surfaces;

        for tally in [&mut overall, by_category.entry(word.category).or_default()] {
            tally.matched += matched as u64;
            tally.predicted += pred_surfaces.len() as u64;
            tally.gold += gold_surfaces.len() as u64;
            tally.words += 1;
            tally.accuracy_sum += accuracy;
            tally.exact += exact as u64;
        }
    }

    let per_category = by_category
        .iter()
        .map(|(&category, tally)| {
            (
                category,
                CategoryScore {
                    precision: tally.precision(),
                    recall: tally.recall(),
                    f1: tally.f1(),
                    support: tally.words as usize,
                },
            )
        })
        .collect();

    Ok(SegmentationReport {
        precision: overall.precision(),
        recall: overall.recall(),
        f1: overall.f1(),
        accuracy: overall.accuracy_sum / overall.words as f64,
        exact_match_rate: overall.exact as f64 / overall.words as f64,
        per_category,
        word_count: gold.len(),
    })
}

/// Turns per-token base-2 log probabilities (each in `(-inf, 0]`) into
/// bits-per-character and bits-per-token over `n_characters` of text.
pub fn measure_efficiency(
    logprobs: &[f64],
    n_characters: usize,
) -> Result<EncodingEfficiency, EvalError> {
    if logprobs.is_empty() {
        return Err(EvalError::EmptyLogProbs);
    }
    if n_characters == 0 {
        return Err(EvalError::ZeroCharacters);
    }
    let mut total_bits = 0.0;
    for &lp in logprobs {
        if lp.is_nan() || lp > 0.0 {
            return Err(EvalError::BadLogProb(lp));
        }
        total_bits -= lp;
    }
    Ok(EncodingEfficiency {
        total_bits,
        n_tokens: logprobs.len(),
        n_characters,
        bpc: total_bits / n_characters as f64,
        bpt: total_bits / logprobs.len() as f64,
    })
}

/// Add-k smoothed n-gram language model over token ids, order 1 or 2.
///
/// `P(t | ctx) = (count(ctx, t) + k) / (count(ctx) + k * V)`, so every
/// context distributes probability 1 over the vocabulary and a context
/// never seen in training backs off to the uniform `1 / V`.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramLm {
    order: u8,
    smoothing_k: f64,
    vocab_size: usize,
    contexts: BTreeMap<Vec<u32>, ContextCounts>,
}

#[derive(Debug, Clone, PartialEq, Default)]
struct ContextCounts {
    total: u64,
    per_token: BTreeMap<u32, u64>,
}

impl NgramLm {
    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn smoothing_k(&self) -> f64 {
        self.smoothing_k
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }
}

/// Counts n-grams over `stream`. Position `i` is counted under the
/// preceding `min(order - 1, i)` tokens, so under order 2 the stream's
/// first token trains the empty context; scoring uses the same rule.
pub fn train_lm(
    stream: &[u32],
    order: u8,
    smoothing_k: f64,
    vocab_size: usize,
) -> Result<NgramLm, EvalError> {
    if !(1..=2).contains(&order) {
        return Err(EvalError::UnknownOrder(order));
    }
    if !smoothing_k.is_finite() || smoothing_k <= 0.0 {
        return Err(EvalError::BadSmoothing(smoothing_k));
    }
    if stream.is_empty() {
        return Err(EvalError::EmptyStream);
    }
    for &id in stream {
        if id as usize >= vocab_size {
            return Err(EvalError::TokenOutOfRange { id, vocab_size });
        }
    }

    let history = order as usize - 1;
    let mut contexts: BTreeMap<Vec<u32>, ContextCounts> = BTreeMap::new();
    for (i, &token) in stream.iter().enumerate() {
        let ctx = stream[i - history.min(i)..i].to_vec();
        let counts = contexts.entry(ctx).or_default();
        counts.total += 1;
        *counts.per_token.entry(token).or_insert(0) += 1;
    }

    Ok(NgramLm {
        order,
        smoothing_k,
        vocab_size,
        contexts,
    })
}

/// Base-2 log probability of `token` after `context`. Only the trailing
/// `order - 1` context tokens are consulted. `token` must be inside the
/// vocabulary the model was trained with.
pub fn lm_logprob(lm: &NgramLm, context: &[u32], token: u32) -> f64 {
    debug_assert!((token as usize) < lm.vocab_size);
    let history = lm.order as usize - 1;
    let ctx = &context[context.len() - history.min(context.len())..];
    let (seen, total) = match lm.contexts.get(ctx) {
        Some(counts) => (
            counts.per_token.get(&token).copied().unwrap_or(0),
            counts.total,
        ),
        None => (0, 0),
    };
    let p = (seen as f64 + lm.smoothing_k)
        / (total as f64 + lm.smoothing_k * lm.vocab_size as f64);
    libm::log2(p)
}

/// Per-token log probabilities for a whole stream, feeding
/// [`measure_efficiency`]. Context truncation at the stream head matches
/// training, so a stream scored against a model trained on itself sees
/// every n-gram it contributed.
pub fn sequence_logprobs(lm: &NgramLm, stream: &[u32]) -> Result<Vec<f64>, EvalError> {
    for &id in stream {
        if id as usize >= lm.vocab_size {
            return Err(EvalError::TokenOutOfRange {
                id,
                vocab_size: lm.vocab_size,
            });
        }
    }
    Ok(stream
        .iter()
        .enumerate()
        .map(|(i, &token)| lm_logprob(lm, &stream[..i], token))
        .collect())
}

/// Retrains the segmentation model at each annotation budget in `ratios`
/// and scores Viterbi segmentations of the holdout words.
///
/// Annotations are shuffled once under `options.rng_seed`, and budget `n`
/// takes the first `n` of that fixed order, so smaller budgets are strict
/// prefixes of larger ones. Budget 0 trains unsupervised. Rows come back
/// sorted by budget with duplicates collapsed.
pub fn run_annotation_sweep(
    counts: &FrequencyTable,
    annotations: &[AnnotatedWord],
    holdout: &[AnnotatedWord],
    ratios: &[usize],
    options: &TrainOptions,
) -> Result<Vec<SweepRow>, EvalError> {
    if holdout.is_empty() {
        return Err(EvalError::EmptyHoldout);
    }
    let annotated_words: BTreeSet<String> =
        annotations.iter().map(|a| fold_case(&a.word)).collect();
    for word in holdout {
        if annotated_words.contains(&fold_case(&word.word)) {
            return Err(EvalError::OverlappingHoldout(word.word.clone()));
        }
    }
    let mut budgets: Vec<usize> = ratios.to_vec();
    budgets.sort_unstable();
    budgets.dedup();
    for &n in &budgets {
        if n > annotations.len() {
            return Err(EvalError::RatioOutOfRange {
                requested: n,
                available: annotations.len(),
            });
        }
    }

    let mut shuffled = annotations.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(options.rng_seed);
    shuffle(&mut shuffled, &mut rng);

    let mut rows = Vec::with_capacity(budgets.len());
    for &n in &budgets {
        let outcome = if n == 0 {
            train_unsupervised(counts, options)?
        } else {
            train_semisupervised(counts, &shuffled[..n], options)?
        };
        let mut predicted: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for word in holdout {
            let result = viterbi_segment(&outcome.model, &word.word)?;
            predicted.insert(word.word.clone(), result.segments);
        }
        let report = score_segmentations(holdout, &predicted)?;
        rows.push(SweepRow {
            annotation_count: n,
            precision: report.precision,
            recall: report.recall,
            f1: report.f1,
            accuracy: report.accuracy,
        });
    }
    Ok(rows)
}

const MATCH_NOTE: &str =
    "match: case-insensitive surface multiset overlap per word (tags ignored)";
const ACCURACY_NOTE: &str = "accuracy: mean of match / max(|predicted|, |gold|) over words";
const EXACT_NOTE: &str = "exact-match: predicted surfaces equal gold as ordered lists";

/// Human-readable segmentation report with the metric definitions in the
/// header. All values are rounded to 4 decimals.
pub fn render_segmentation_table(report: &SegmentationReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "segmentation quality over {} words\n",
        report.word_count
    ));
    out.push_str(&format!("  {MATCH_NOTE}\n"));
    out.push_str(&format!("  {ACCURACY_NOTE}\n"));
    out.push_str(&format!("  {EXACT_NOTE}\n"));
    out.push_str(&format!("precision    {:.4}\n", report.precision));
    out.push_str(&format!("recall       {:.4}\n", report.recall));
    out.push_str(&format!("f1           {:.4}\n", report.f1));
    out.push_str(&format!("accuracy     {:.4}\n", report.accuracy));
    out.push_str(&format!("exact-match  {:.4}\n", report.exact_match_rate));
    if !report.per_category.is_empty() {
        out.push_str("category    precision  recall  f1      support\n");
        for category in MorphCategory::ALL {
            if let Some(score) = report.per_category.get(&category) {
                out.push_str(&format!(
                    "{:<11} {:<10.4} {:<7.4} {:<7.4} {}\n",
                    category.name(),
                    score.precision,
                    score.recall,
                    score.f1,
                    score.support
                ));
            }
        }
    }
    out
}

/// Machine-readable `key=value` form of a segmentation report, one metric
/// per line, rounded to 4 decimals.
pub fn render_segmentation_kv(report: &SegmentationReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("words={}\n", report.word_count));
    out.push_str(&format!("precision={:.4}\n", report.precision));
    out.push_str(&format!("recall={:.4}\n", report.recall));
    out.push_str(&format!("f1={:.4}\n", report.f1));
    out.push_str(&format!("accuracy={:.4}\n", report.accuracy));
    out.push_str(&format!("exact-match={:.4}\n", report.exact_match_rate));
    for category in MorphCategory::ALL {
        if let Some(score) = report.per_category.get(&category) {
            let name = category.name();
            out.push_str(&format!("category.{name}.precision={:.4}\n", score.precision));
            out.push_str(&format!("category.{name}.recall={:.4}\n", score.recall));
            out.push_str(&format!("category.{name}.f1={:.4}\n", score.f1));
            out.push_str(&format!("category.{name}.support={}\n", score.support));
        }
    }
    out
}

/// Human-readable efficiency report, rounded to 4 decimals.
pub fn render_efficiency_table(eff: &EncodingEfficiency) -> String {
    let mut out = String::new();
    out.push_str("encoding efficiency\n");
    out.push_str(&format!("tokens      {}\n", eff.n_tokens));
    out.push_str(&format!("characters  {}\n", eff.n_characters));
    out.push_str(&format!("total-bits  {:.4}\n", eff.total_bits));
    out.push_str(&format!("bpt         {:.4}\n", eff.bpt));
    out.push_str(&format!("bpc         {:.4}\n", eff.bpc));
    out
}

/// Machine-readable `key=value` form of an efficiency report.
pub fn render_efficiency_kv(eff: &EncodingEfficiency) -> String {
    let mut out = String::new();
    out.push_str(&format!("tokens={}\n", eff.n_tokens));
    out.push_str(&format!("characters={}\n", eff.n_characters));
    out.push_str(&format!("total-bits={:.4}\n", eff.total_bits));
    out.push_str(&format!("bpt={:.4}\n", eff.bpt));
    out.push_str(&format!("bpc={:.4}\n", eff.bpc));
    out
}

/// Sweep rows as TAB-separated `n precision recall f1 accuracy` lines,
/// rounded to 4 decimals.
pub fn render_sweep(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(&format!(
            "{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\n",
            row.annotation_count, row.precision, row.recall, row.f1, row.accuracy
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SegmentTag;

    fn word(w: &str, segments: &[&str], category: MorphCategory) -> AnnotatedWord {
        let tagged = segments
            .iter()
            .map(|s| ((*s).to_owned(), SegmentTag::Root))
            .collect();
        AnnotatedWord::new(w.to_owned(), tagged, category).unwrap()
    }

    fn predictions(pairs: &[(&str, &[&str])]) -> BTreeMap<String, Vec<String>> {
        pairs
            .iter()
            .map(|(w, segs)| {
                (
                    (*w).to_owned(),
                    segs.iter().map(|s| (*s).to_owned()).collect(),
                )
            })
            .collect()
    }

    fn table2_gold() -> Vec<AnnotatedWord> {
        vec![
            word("Kranie", &["Kranie"], MorphCategory::Root),
            word(
                "Landstræner",
                &["Land", "s", "træn", "er"],
                MorphCategory::Linking,
            ),
            word("Lånte", &["Lån", "te"], MorphCategory::Inflection),
            word("Bibringe", &["Bi", "bringe"], MorphCategory::Prefix),
            word("Skoletaske", &["Skole", "taske"], MorphCategory::Compound),
            word("Venlig", &["Ven", "lig"], MorphCategory::Suffix),
        ]
    }

    #[test]
    fn mis_split_word_scores_by_multiset_overlap() {
        // Gold land-s-hold against predicted land-s-ho-ld: two of four
        // predicted segments match, two of three gold segments are found.
        let gold = vec![word("landshold", &["land", "s", "hold"], MorphCategory::Linking)];
        let predicted = predictions(&[("landshold", &["land", "s", "ho", "ld"])]);
        let report = score_segmentations(&gold, &predicted).unwrap();
        assert_eq!(report.precision, 0.5);
        assert_eq!(report.recall, 2.0 / 3.0);
        let f1 = 2.0 * (0.5 * (2.0 / 3.0)) / (0.5 + 2.0 / 3.0);
        assert!((report.f1 - f1).abs() < 1e-12);
        assert!((report.f1 - 4.0 / 7.0).abs() < 1e-12);
        assert_eq!(format!("{:.4}", report.f1), "0.5714");
        assert_eq!(report.accuracy, 0.5);
        assert_eq!(report.exact_match_rate, 0.0);
        assert_eq!(report.word_count, 1);
    }

    #[test]
    fn perfect_predictions_score_one_everywhere() {
        let gold = table2_gold();
        // Case differences must not matter.
        let predicted = predictions(&[
            ("Kranie", &["kranie"]),
            ("Landstræner", &["land", "s", "træn", "er"]),
            ("Lånte", &["lån", "te"]),
            ("Bibringe", &["bi", "bringe"]),
            ("Skoletaske", &["skole", "taske"]),
            ("Venlig", &["ven", "lig"]),
        ]);
        let report = score_segmentations(&gold, &predicted).unwrap();
        assert_eq!(report.precision, 1.0);
        assert_eq!(report.recall, 1.0);
        assert_eq!(report.f1, 1.0);
        assert_eq!(report.accuracy, 1.0);
        assert_eq!(report.exact_match_rate, 1.0);
        assert_eq!(report.word_count, 6);
        assert_eq!(report.per_category.len(), 6);
        for score in report.per_category.values() {
            assert_eq!(score.precision, 1.0);
            assert_eq!(score.recall, 1.0);
            assert_eq!(score.f1, 1.0);
            assert_eq!(score.support, 1);
        }
    }

    #[test]
    fn perturbed_predictions_match_hand_computed_scores() {
        let gold = table2_gold();
        // Two words split wrong, one left whole, one fused differently;
        // hand-computed: matched 7, predicted 11, gold 13.
        let predicted = predictions(&[
            ("Kranie", &["kranie"]),
            ("Landstræner", &["land", "s", "træner"]),
            ("Lånte", &["lånte"]),
            ("Bibringe", &["bi", "bringe"]),
            ("Skoletaske", &["sko", "letaske"]),
            ("Venlig", &["ven", "lig"]),
        ]);
        let report = score_segmentations(&gold, &predicted).unwrap();
        assert!((report.precision - 7.0 / 11.0).abs() < 1e-12);
        assert!((report.recall - 7.0 / 13.0).abs() < 1e-12);
        assert!((report.f1 - 7.0 / 12.0).abs() < 1e-12);
        assert!((report.accuracy - 3.5 / 6.0).abs() < 1e-12);
        assert_eq!(report.exact_match_rate, 0.5);
        assert_eq!(format!("{:.4}", report.precision), "0.6364");
        assert_eq!(format!("{:.4}", report.recall), "0.5385");
        assert_eq!(format!("{:.4}", report.f1), "0.5833");
        assert_eq!(format!("{:.4}", report.accuracy), "0.5833");

        let supports: usize = report.per_category.values().map(|s| s.support).sum();
        assert_eq!(supports, report.word_count);
        let linking = &report.per_category[&MorphCategory::Linking];
        assert!((linking.precision - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(linking.recall, 0.5);
        assert!((linking.f1 - 4.0 / 7.0).abs() < 1e-12);
        assert_eq!(linking.support, 1);
        let compound = &report.per_category[&MorphCategory::Compound];
        assert_eq!((compound.precision, compound.recall, compound.f1), (0.0, 0.0, 0.0));
        assert_eq!(report.per_category[&MorphCategory::Root].f1, 1.0);
        assert_eq!(report.per_category[&MorphCategory::Prefix].f1, 1.0);
        assert_eq!(report.per_category[&MorphCategory::Suffix].f1, 1.0);
        assert_eq!(report.per_category[&MorphCategory::Inflection].f1, 0.0);

        // Exact match can never beat accuracy, which credits partial overlap.
        assert!(report.exact_match_rate <= report.accuracy + 1e-12);
    }

    #[test]
    fn strict_matching_requires_positions_to_line_up() {
        let gold = vec![word("abba", &["ab", "ba"], MorphCategory::Root)];
        let swapped = predictions(&[("abba", &["ba", "ab"])]);
        let loose = score_segmentations(&gold, &swapped).unwrap();
        assert_eq!(loose.precision, 1.0);
        assert_eq!(loose.recall, 1.0);
        assert_eq!(loose.exact_match_rate, 0.0);
        let strict = score_segmentations_strict(&gold, &swapped).unwrap();
        assert_eq!(strict.precision, 0.0);
        assert_eq!(strict.recall, 0.0);
        assert_eq!(strict.f1, 0.0);
        assert_eq!(strict.accuracy, 0.0);
    }

    #[test]
    fn scoring_rejects_empty_gold_and_missing_predictions() {
        assert_eq!(
            score_segmentations(&[], &BTreeMap::new()).unwrap_err(),
            EvalError::EmptyGold
        );
        let gold = vec![word("hej", &["hej"], MorphCategory::Root)];
        assert_eq!(
            score_segmentations(&gold, &BTreeMap::new()).unwrap_err(),
            EvalError::MissingPrediction("hej".to_owned())
        );
    }

    #[test]
    fn powers_of_two_fixture_measures_exactly() {
        // Four tokens, each with probability 1/2, over eight characters.
        let eff = measure_efficiency(&[-1.0, -1.0, -1.0, -1.0], 8).unwrap();
        assert_eq!(eff.total_bits, 4.0);
        assert_eq!(eff.bpt, 1.0);
        assert_eq!(eff.bpc, 0.5);
        assert_eq!(eff.n_tokens, 4);
        assert_eq!(eff.n_characters, 8);

        // A certain token costs no bits.
        let free = measure_efficiency(&[0.0], 3).unwrap();
        assert_eq!(free.total_bits, 0.0);
        assert_eq!(free.bpc, 0.0);
    }

    #[test]
    fn bpt_over_bpc_equals_chars_over_tokens() {
        let logprobs = [-0.3, -2.25, -0.0078125, -5.5, -1.0, -0.875, -3.125];
        let n_characters = 23;
        let eff = measure_efficiency(&logprobs, n_characters).unwrap();
        let identity = eff.bpt / eff.bpc - n_characters as f64 / logprobs.len() as f64;
        assert!(identity.abs() <= 1e-9);
    }

    #[test]
    fn efficiency_rejects_bad_inputs() {
        assert_eq!(
            measure_efficiency(&[], 5).unwrap_err(),
            EvalError::EmptyLogProbs
        );
        assert_eq!(
            measure_efficiency(&[-1.0], 0).unwrap_err(),
            EvalError::ZeroCharacters
        );
        assert_eq!(
            measure_efficiency(&[-1.0, 0.5], 5).unwrap_err(),
            EvalError::BadLogProb(0.5)
        );
        assert!(matches!(
            measure_efficiency(&[f64::NAN], 5).unwrap_err(),
            EvalError::BadLogProb(_)
        ));
    }

    #[test]
    fn unigram_add_one_matches_hand_computation() {
        // Three occurrences of token 7, k = 1, vocabulary of 10:
        // P(7) = (3 + 1) / (3 + 10) and P(other) = 1 / 13.
        let lm = train_lm(&[7, 7, 7], 1, 1.0, 10).unwrap();
        assert!((lm_logprob(&lm, &[], 7) - libm::log2(4.0 / 13.0)).abs() < 1e-12);
        assert!((lm_logprob(&lm, &[], 0) - libm::log2(1.0 / 13.0)).abs() < 1e-12);
        // Unigram probabilities ignore context.
        assert_eq!(lm_logprob(&lm, &[3], 7), lm_logprob(&lm, &[], 7));
    }

    #[test]
    fn bigram_backs_off_to_uniform_on_unseen_context() {
        let lm = train_lm(&[7, 7, 7], 2, 1.0, 10).unwrap();
        // Seen context [7]: token 7 followed it twice out of two.
        assert!((lm_logprob(&lm, &[7], 7) - libm::log2(3.0 / 12.0)).abs() < 1e-12);
        // The stream head trained the empty context once.
        assert!((lm_logprob(&lm, &[], 7) - libm::log2(2.0 / 11.0)).abs() < 1e-12);
        // A context never seen is uniform over the vocabulary.
        assert!((lm_logprob(&lm, &[3], 9) - libm::log2(0.1)).abs() < 1e-12);
        // Only the last order-1 tokens matter.
        assert_eq!(lm_logprob(&lm, &[1, 2, 7], 7), lm_logprob(&lm, &[7], 7));
    }

    #[test]
    fn every_context_distributes_probability_one() {
        let stream = [3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5];
        for order in [1u8, 2] {
            let lm = train_lm(&stream, order, 0.25, 12).unwrap();
            for ctx in [&[][..], &[5][..], &[11][..]] {
                let mass: f64 = (0..12u32)
                    .map(|t| libm::exp2(lm_logprob(&lm, ctx, t)))
                    .sum();
                assert!(
                    (mass - 1.0).abs() <= 1e-9,
                    "order {order} ctx {ctx:?} mass {mass}"
                );
            }
        }
    }

    #[test]
    fn sequence_scoring_matches_per_token_calls() {
        let stream = [2, 0, 2, 1];
        let lm = train_lm(&stream, 2, 0.5, 3).unwrap();
        let scores = sequence_logprobs(&lm, &stream).unwrap();
        assert_eq!(scores.len(), 4);
        assert_eq!(scores[0], lm_logprob(&lm, &[], 2));
        assert_eq!(scores[2], lm_logprob(&lm, &[0], 2));
        assert!(scores.iter().all(|&s| s <= 0.0));
        assert_eq!(
            sequence_logprobs(&lm, &[9]).unwrap_err(),
            EvalError::TokenOutOfRange {
                id: 9,
                vocab_size: 3
            }
        );
    }

    #[test]
    fn lm_training_rejects_bad_inputs() {
        assert_eq!(
            train_lm(&[1], 3, 1.0, 5).unwrap_err(),
            EvalError::UnknownOrder(3)
        );
        assert_eq!(train_lm(&[], 1, 1.0, 5).unwrap_err(), EvalError::EmptyStream);
        assert_eq!(
            train_lm(&[1], 1, 0.0, 5).unwrap_err(),
            EvalError::BadSmoothing(0.0)
        );
        assert_eq!(
            train_lm(&[5], 1, 1.0, 5).unwrap_err(),
            EvalError::TokenOutOfRange {
                id: 5,
                vocab_size: 5
            }
        );
    }

    fn sweep_fixture() -> (FrequencyTable, Vec<AnnotatedWord>, Vec<AnnotatedWord>) {
        let mut counts = FrequencyTable::new();
        for (w, n) in [
            ("husbåd", 9),
            ("solskin", 8),
            ("abekat", 7),
            ("løbesko", 6),
            ("hus", 5),
            ("sko", 5),
            ("kat", 4),
            ("sol", 4),
            ("skohus", 3),
            ("katsol", 2),
        ] {
            counts.add(w, n);
        }
        let annotations = vec![
            word("husbåd", &["hus", "båd"], MorphCategory::Compound),
            word("solskin", &["sol", "skin"], MorphCategory::Compound),
            word("abekat", &["abe", "kat"], MorphCategory::Compound),
            word("løbesko", &["løbe", "sko"], MorphCategory::Compound),
        ];
        let holdout = vec![
            word("skohus", &["sko", "hus"], MorphCategory::Compound),
            word("katsol", &["kat", "sol"], MorphCategory::Compound),
        ];
        (counts, annotations, holdout)
    }

    #[test]
    fn sweep_rows_are_deterministic_with_prefix_budgets() {
        let (counts, annotations, holdout) = sweep_fixture();
        let options = TrainOptions::seeded(11);
        let a = run_annotation_sweep(&counts, &annotations, &holdout, &[0, 2, 4], &options)
            .unwrap();
        let b = run_annotation_sweep(&counts, &annotations, &holdout, &[0, 2, 4], &options)
            .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert_eq!(
            a.iter().map(|r| r.annotation_count).collect::<Vec<_>>(),
            [0, 2, 4]
        );

        // Dropping the largest budget must not change earlier rows: budgets
        // draw prefixes of one fixed shuffled order.
        let c = run_annotation_sweep(&counts, &annotations, &holdout, &[2, 0], &options).unwrap();
        assert_eq!(c, a[..2].to_vec());

        // Budget 0 is plain unsupervised training.
        let unsup = train_unsupervised(&counts, &options).unwrap();
        let mut predicted = BTreeMap::new();
        for w in &holdout {
            predicted.insert(
                w.word.clone(),
                viterbi_segment(&unsup.model, &w.word).unwrap().segments,
            );
        }
        let baseline = score_segmentations(&holdout, &predicted).unwrap();
        assert_eq!(a[0].f1, baseline.f1);
        assert_eq!(a[0].accuracy, baseline.accuracy);
    }

    #[test]
    fn sweep_rejects_overlap_and_oversized_budgets() {
        let (counts, annotations, holdout) = sweep_fixture();
        let options = TrainOptions::seeded(11);
        assert_eq!(
            run_annotation_sweep(&counts, &annotations, &holdout, &[0, 9], &options).unwrap_err(),
            EvalError::RatioOutOfRange {
                requested: 9,
                available: 4
            }
        );
        assert_eq!(
            run_annotation_sweep(&counts, &annotations, &[], &[0], &options).unwrap_err(),
            EvalError::EmptyHoldout
        );
        let leaked = vec![word("Husbåd", &["hus", "båd"], MorphCategory::Compound)];
        assert_eq!(
            run_annotation_sweep(&counts, &annotations, &leaked, &[0], &options).unwrap_err(),
            EvalError::OverlappingHoldout("Husbåd".to_owned())
        );
    }

    #[test]
    fn reports_render_in_both_formats() {
        let gold = vec![word("landshold", &["land", "s", "hold"], MorphCategory::Linking)];
        let predicted = predictions(&[("landshold", &["land", "s", "ho", "ld"])]);
        let report = score_segmentations(&gold, &predicted).unwrap();

        let kv = render_segmentation_kv(&report);
        assert_eq!(
            kv,
            "words=1\nprecision=0.5000\nrecall=0.6667\nf1=0.5714\naccuracy=0.5000\n\
             exact-match=0.0000\ncategory.Linking.precision=0.5000\n\
             category.Linking.recall=0.6667\ncategory.Linking.f1=0.5714\n\
             category.Linking.support=1\n"
        );

        let table = render_segmentation_table(&report);
        assert!(table.contains("segmentation quality over 1 words"));
        assert!(table.contains(MATCH_NOTE));
        assert!(table.contains(ACCURACY_NOTE));
        assert!(table.contains(EXACT_NOTE));
        assert!(table.contains("f1           0.5714"));
        assert!(table.contains("Linking"));

        let eff = measure_efficiency(&[-1.0, -1.0, -1.0, -1.0], 8).unwrap();
        assert_eq!(
            render_efficiency_kv(&eff),
            "tokens=4\ncharacters=8\ntotal-bits=4.0000\nbpt=1.0000\nbpc=0.5000\n"
        );
        assert!(render_efficiency_table(&eff).contains("bpc         0.5000"));

        let rows = [
            SweepRow {
                annotation_count: 0,
                precision: 0.5,
                recall: 2.0 / 3.0,
                f1: 4.0 / 7.0,
                accuracy: 0.5,
            },
            SweepRow {
                annotation_count: 50,
                precision: 1.0,
                recall: 1.0,
                f1: 1.0,
                accuracy: 1.0,
            },
        ];
        assert_eq!(
            render_sweep(&rows),
            "0\t0.5000\t0.6667\t0.5714\t0.5000\n50\t1.0000\t1.0000\t1.0000\t1.0000\n"
        );
    }
}
