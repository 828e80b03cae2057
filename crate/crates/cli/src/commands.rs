//! Command implementations. Shared conventions: corpus text files count
//! one document per line; tokenize/detokenize stream line-for-line and
//! preserve whether the input ended in a newline, so the pair composes to
//! the identity on whole files; reports go to stdout unless `--out` names
//! a file.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use morphtok_core::bpe::render_merges;
use morphtok_core::corpus::{
    chunk_text, count_frequencies, parse_annotations, AnnotatedWord, Chunk, FrequencyTable,
};
use morphtok_core::eval::{
    measure_efficiency, render_efficiency_kv, render_efficiency_table, render_segmentation_kv,
    render_segmentation_table, render_sweep, run_annotation_sweep, score_segmentations,
    sequence_logprobs, train_lm,
};
use morphtok_core::morfessor::{
    load_model, save_model, train_semisupervised, train_unsupervised, TrainOptions,
};
use morphtok_core::tokenizer::{
    build_bundle, decode, encode, encode_ids, parse_bundle, render_bundle, segment_chunk,
    BundleFiles, TokenizerBundle, TokenizerError, Variant, SPECIAL_TOKENS,
};

use crate::settings::Settings;
use crate::{
    BuildTokenizerArgs, CliError, CodecArgs, EvalEffArgs, EvalSegArgs, SweepArgs, TrainBpeArgs,
    TrainMorfessorArgs,
};

fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

/// Referenced paths must exist at validation time; a missing path is bad
/// configuration (exit 1), while a failing read of an existing path is an
/// I/O error (exit 2).
fn require_existing(path: PathBuf, what: &str) -> Result<PathBuf, CliError> {
    if path.exists() {
        Ok(path)
    } else {
        Err(CliError::Validation(format!(
            "{what} path {} does not exist",
            path.display()
        )))
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("read {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("write {}: {e}", path.display())))
}

fn read_input(path: Option<PathBuf>) -> Result<String, CliError> {
    match path {
        Some(p) => read_text(&require_existing(p, "input")?),
        None => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| CliError::Io(format!("read stdin: {e}")))?;
            Ok(text)
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Splits into lines, remembering whether a final newline was present so
/// the inverse join can reproduce the original bytes.
fn split_lines(text: &str) -> (Vec<&str>, bool) {
    if text.is_empty() {
        return (Vec::new(), false);
    }
    let trailing_newline = text.ends_with('\n');
    let mut lines: Vec<&str> = text.split('\n').collect();
    if trailing_newline {
        lines.pop();
    }
    (lines, trailing_newline)
}

fn join_lines(lines: &[String], trailing_newline: bool) -> String {
    let mut out = lines.join("\n");
    if trailing_newline {
        out.push('\n');
    }
    out
}

enum CorpusFormat {
    Text,
    Freq,
}

fn corpus_format(
    args: &crate::CorpusArgs,
    settings: &Settings,
) -> Result<CorpusFormat, CliError> {
    let raw = settings.merge_or(args.corpus_format.clone(), "corpus-format", "text".into())?;
    match raw.as_str() {
        "text" => Ok(CorpusFormat::Text),
        "freq" => Ok(CorpusFormat::Freq),
        other => Err(CliError::Validation(format!(
            "corpus-format must be text or freq, got {other:?}"
        ))),
    }
}

fn load_counts(args: &crate::CorpusArgs, settings: &Settings) -> Result<FrequencyTable, CliError> {
    let path = require_existing(
        settings.require_path(args.corpus.clone(), "corpus")?,
        "corpus",
    )?;
    let text = read_text(&path)?;
    match corpus_format(args, settings)? {
        CorpusFormat::Text => Ok(count_frequencies(
            text.lines().flat_map(chunk_text).collect::<Vec<Chunk>>(),
        )),
        CorpusFormat::Freq => FrequencyTable::parse_tsv(&text).map_err(validation),
    }
}

fn load_annotation_file(path: PathBuf, what: &str) -> Result<Vec<AnnotatedWord>, CliError> {
    let path = require_existing(path, what)?;
    parse_annotations(&read_text(&path)?)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn train_options(knobs: &crate::TrainKnobs, settings: &Settings) -> Result<TrainOptions, CliError> {
    let defaults = TrainOptions::default();
    Ok(TrainOptions {
        corpus_weight: settings.merge_or(knobs.alpha, "alpha", defaults.corpus_weight)?,
        annotation_weight: settings.merge(knobs.beta, "beta")?,
        convergence_epsilon: settings.merge(knobs.epsilon, "epsilon")?,
        max_epochs: settings.merge_or(knobs.max_epochs, "max-epochs", defaults.max_epochs)?,
        rng_seed: settings.require(knobs.seed, "seed")?,
    })
}

enum ReportFormat {
    Table,
    Kv,
}

fn report_format(flag: Option<String>, settings: &Settings) -> Result<ReportFormat, CliError> {
    match settings.merge_or(flag, "format", "table".into())?.as_str() {
        "table" => Ok(ReportFormat::Table),
        "kv" => Ok(ReportFormat::Kv),
        other => Err(CliError::Validation(format!(
            "format must be table or kv, got {other:?}"
        ))),
    }
}

const VOCAB_FILE: &str = "vocab.tsv";
const TABLE_FILE: &str = "morphtable.tsv";
const MODEL_FILE: &str = "morfessor.model";
const MERGES_FILE: &str = "bpe.merges";
const CONFIG_FILE: &str = "config";

fn write_bundle(dir: &Path, files: &BundleFiles) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("create {}: {e}", dir.display())))?;
    write_text(&dir.join(VOCAB_FILE), &files.vocab_tsv)?;
    write_text(&dir.join(TABLE_FILE), &files.morphtable_tsv)?;
    write_text(&dir.join(MODEL_FILE), &files.morfessor_model)?;
    write_text(&dir.join(CONFIG_FILE), &files.config)?;
    let merges_path = dir.join(MERGES_FILE);
    match &files.bpe_merges {
        Some(merges) => write_text(&merges_path, merges)?,
        // A leftover merges file from an earlier mixed build would corrupt
        // a morph bundle, so clear it.
        None => {
            if merges_path.exists() {
                std::fs::remove_file(&merges_path).map_err(|e| {
                    CliError::Io(format!("remove {}: {e}", merges_path.display()))
                })?;
            }
        }
    }
    Ok(())
}

fn read_bundle_file(dir: &Path, name: &str) -> Result<String, CliError> {
    let path = dir.join(name);
    if !path.exists() {
        return Err(CliError::Validation(format!(
            "bundle {}: missing {name}",
            dir.display()
        )));
    }
    read_text(&path)
}

fn load_bundle(
    args_bundle: Option<PathBuf>,
    settings: &Settings,
) -> Result<TokenizerBundle, CliError> {
    let dir = require_existing(settings.require_path(args_bundle, "bundle")?, "bundle")?;
    let merges_path = dir.join(MERGES_FILE);
    let bpe_merges = if merges_path.exists() {
        Some(read_text(&merges_path)?)
    } else {
        None
    };
    let files = BundleFiles {
        vocab_tsv: read_bundle_file(&dir, VOCAB_FILE)?,
        morphtable_tsv: read_bundle_file(&dir, TABLE_FILE)?,
        morfessor_model: read_bundle_file(&dir, MODEL_FILE)?,
        bpe_merges,
        config: read_bundle_file(&dir, CONFIG_FILE)?,
    };
    parse_bundle(&files).map_err(|e| CliError::Validation(format!("bundle {}: {e}", dir.display())))
}

pub fn train_morfessor(args: TrainMorfessorArgs, settings: &Settings) -> Result<(), CliError> {
    let counts = load_counts(&args.corpus, settings)?;
    let annotations = match settings.merge(args.annotations, "annotations")? {
        Some(path) => Some(load_annotation_file(path, "annotations")?),
        None => None,
    };
    let out = settings.require_path(args.out, "out")?;
    let options = train_options(&args.knobs, settings)?;

    let outcome = match &annotations {
        Some(gold) => {
            println!("mode semi-supervised with {} annotations", gold.len());
            train_semisupervised(&counts, gold, &options).map_err(validation)?
        }
        None => {
            println!("mode unsupervised");
            train_unsupervised(&counts, &options).map_err(validation)?
        }
    };
    write_text(&out, &save_model(&outcome.model))?;
    println!("initial cost {:.4} bits", outcome.initial_cost);
    println!("final cost {:.4} bits", outcome.final_cost);
    println!("epochs {}", outcome.epochs_run);
    Ok(())
}

pub fn train_bpe(args: TrainBpeArgs, settings: &Settings) -> Result<(), CliError> {
    let counts = load_counts(&args.corpus, settings)?;
    let vocab_size = settings.require(args.vocab_size, "vocab-size")?;
    let out = settings.require_path(args.out, "out")?;
    let model = morphtok_core::bpe::train_bpe(&counts, vocab_size).map_err(validation)?;
    write_text(&out, &render_merges(&model))?;
    println!("vocab {}", model.vocab_size());
    println!("merges {}", model.merge_count());
    Ok(())
}

pub fn build_tokenizer(args: BuildTokenizerArgs, settings: &Settings) -> Result<(), CliError> {
    let counts = load_counts(&args.corpus, settings)?;
    let model_path = require_existing(settings.require_path(args.model, "model")?, "model")?;
    let model = load_model(&read_text(&model_path)?)
        .map_err(|e| CliError::Validation(format!("model {}: {e}", model_path.display())))?;
    let variant_raw: String = settings.require(args.variant, "variant")?;
    let variant = Variant::parse(&variant_raw).ok_or_else(|| {
        CliError::Validation(format!("variant must be morph or mixed, got {variant_raw:?}"))
    })?;
    let vocab_size = settings.require(args.vocab_size, "vocab-size")?;
    // The morph cascade has no BPE stage, so its ratio is fixed at 1.
    let morph_ratio = match variant {
        Variant::Morph => settings.merge_or(args.morph_ratio, "morph-ratio", 1.0)?,
        Variant::Mixed => settings.require(args.morph_ratio, "morph-ratio")?,
    };
    let out = settings.require_path(args.out, "out")?;

    let bundle = build_bundle(variant, &counts, model, vocab_size, morph_ratio)
        .map_err(validation)?;
    write_bundle(&out, &render_bundle(&bundle))?;
    println!(
        "partition specials={} morph={} bpe={}",
        SPECIAL_TOKENS.len(),
        bundle.morph_budget(),
        bundle.bpe_budget()
    );
    println!("vocab {}", bundle.vocab_size());
    Ok(())
}

pub fn tokenize(args: CodecArgs, settings: &Settings) -> Result<(), CliError> {
    let bundle = load_bundle(args.bundle, settings)?;
    let add_sentinels = settings.merge_flag(args.add_sentinels, "add-sentinels")?;
    let input = settings.merge(args.input, "input")?;
    let output = settings.merge(args.output, "output")?;
    let text = read_input(input)?;

    let (lines, trailing_newline) = split_lines(&text);
    let encoded: Vec<String> = lines
        .iter()
        .map(|line| {
            let seq = encode(&bundle, line, add_sentinels);
            let ids: Vec<String> = seq.ids.iter().map(u32::to_string).collect();
            ids.join(" ")
        })
        .collect();
    write_output(output.as_deref(), &join_lines(&encoded, trailing_newline))
}

pub fn detokenize(args: CodecArgs, settings: &Settings) -> Result<(), CliError> {
    let bundle = load_bundle(args.bundle, settings)?;
    let input = settings.merge(args.input, "input")?;
    let output = settings.merge(args.output, "output")?;
    let text = read_input(input)?;

    let (lines, trailing_newline) = split_lines(&text);
    let mut decoded = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let mut ids = Vec::new();
        for token in line.split_whitespace() {
            let id: u32 = token.parse().map_err(|_| {
                CliError::Validation(format!("line {}: invalid token id {token:?}", i + 1))
            })?;
            ids.push(id);
        }
        let restored = decode(&bundle, &ids).map_err(|TokenizerError::BadId(id)| {
            CliError::Validation(format!(
                "line {}: token id {id} outside the vocabulary of size {}",
                i + 1,
                bundle.vocab_size()
            ))
        })?;
        decoded.push(restored);
    }
    write_output(output.as_deref(), &join_lines(&decoded, trailing_newline))
}

pub fn eval_seg(args: EvalSegArgs, settings: &Settings) -> Result<(), CliError> {
    let bundle = load_bundle(args.bundle, settings)?;
    let gold = load_annotation_file(
        settings.require_path(args.annotations, "annotations")?,
        "annotations",
    )?;
    let format = report_format(args.format, settings)?;
    let out = settings.merge(args.out, "out")?;

    let mut predicted: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for word in &gold {
        // Annotated words are non-empty and whitespace-free, so they are
        // valid chunks by construction.
        let chunk = Chunk::from_raw(&word.word)
            .ok_or_else(|| CliError::Internal(format!("unchunkable word {:?}", word.word)))?;
        predicted.insert(word.word.clone(), segment_chunk(&bundle, &chunk));
    }
    let report = score_segmentations(&gold, &predicted).map_err(validation)?;
    let text = match format {
        ReportFormat::Table => render_segmentation_table(&report),
        ReportFormat::Kv => render_segmentation_kv(&report),
    };
    write_output(out.as_deref(), &text)
}

pub fn eval_eff(args: EvalEffArgs, settings: &Settings) -> Result<(), CliError> {
    let bundle = load_bundle(args.bundle, settings)?;
    let input = require_existing(settings.require_path(args.input, "input")?, "input")?;
    let order = settings.merge_or(args.order, "order", 2)?;
    let smoothing_k = settings.merge_or(args.smoothing_k, "smoothing-k", 1.0)?;
    let format = report_format(args.format, settings)?;
    let out = settings.merge(args.out, "out")?;

    let text = read_text(&input)?;
    let (lines, _) = split_lines(&text);
    if lines.len() < 2 {
        return Err(CliError::Validation(format!(
            "{}: need at least 2 lines to split into train and eval halves",
            input.display()
        )));
    }
    let train_line_count = lines.len() - lines.len() / 2;
    let train_text = lines[..train_line_count].join("\n");
    let eval_text = lines[train_line_count..].join("\n");

    let train_ids = encode_ids(&bundle, &train_text);
    let eval_ids = encode_ids(&bundle, &eval_text);
    let lm = train_lm(&train_ids, order, smoothing_k, bundle.vocab_size())
        .map_err(validation)?;
    // The ids came from this very bundle, so scoring cannot reject them.
    let logprobs =
        sequence_logprobs(&lm, &eval_ids).map_err(|e| CliError::Internal(e.to_string()))?;
    let eff =
        measure_efficiency(&logprobs, eval_text.chars().count()).map_err(validation)?;

    let mut report = String::new();
    match format {
        ReportFormat::Table => {
            report.push_str(&format!(
                "language model order {order}, add-k {smoothing_k}, trained on {} lines, scored on {} lines\n",
                train_line_count,
                lines.len() - train_line_count
            ));
            report.push_str(&render_efficiency_table(&eff));
        }
        ReportFormat::Kv => {
            report.push_str(&format!("order={order}\n"));
            report.push_str(&format!("smoothing-k={smoothing_k}\n"));
            report.push_str(&format!("train-lines={train_line_count}\n"));
            report.push_str(&format!("eval-lines={}\n", lines.len() - train_line_count));
            report.push_str(&render_efficiency_kv(&eff));
        }
    }
    write_output(out.as_deref(), &report)
}

pub fn sweep(args: SweepArgs, settings: &Settings) -> Result<(), CliError> {
    let counts = load_counts(&args.corpus, settings)?;
    let annotations = load_annotation_file(
        settings.require_path(args.annotations, "annotations")?,
        "annotations",
    )?;
    let holdout = load_annotation_file(settings.require_path(args.holdout, "holdout")?, "holdout")?;
    let ratios_raw: String = settings.require(args.ratios, "ratios")?;
    let options = train_options(&args.knobs, settings)?;
    let out = settings.merge(args.out, "out")?;

    let mut ratios = Vec::new();
    for piece in ratios_raw.split(',') {
        let piece = piece.trim();
        let n: usize = piece.parse().map_err(|_| {
            CliError::Validation(format!("ratios: expected a number, got {piece:?}"))
        })?;
        ratios.push(n);
    }

    let rows =
        run_annotation_sweep(&counts, &annotations, &holdout, &ratios, &options)
            .map_err(validation)?;
    write_output(out.as_deref(), &render_sweep(&rows))
}
