//! Batch front end for the tokenization toolkit: training, bundle
//! building, line-oriented tokenize/detokenize, evaluation, and the
//! annotation-budget sweep.
//!
//! Every command is deterministic given its settings: randomness flows
//! only from `--seed`, nothing reads the clock or locale, and reruns
//! produce byte-identical artifacts. Exit codes: 0 success, 1 validation
//! failure, 2 I/O failure, 3 internal invariant breach.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config values, or input data. Exit 1.
    Validation(String),
    /// A read or write failed. Exit 2.
    Io(String),
    /// The toolkit contradicted itself. Exit 3.
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "{msg}"),
            CliError::Io(msg) => write!(f, "{msg}"),
            CliError::Internal(msg) => write!(f, "internal invariant breach: {msg}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "morphtok", version, about = "Morphologically informed subword tokenization")]
struct Cli {
    /// Line-oriented key=value settings file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the MDL segmentation model, optionally with gold annotations
    TrainMorfessor(TrainMorfessorArgs),
    /// Train a byte-pair encoding merge list
    TrainBpe(TrainBpeArgs),
    /// Build a tokenizer bundle directory from a trained model
    BuildTokenizer(BuildTokenizerArgs),
    /// Encode text lines to token id lines
    Tokenize(CodecArgs),
    /// Decode token id lines back to text lines
    Detokenize(CodecArgs),
    /// Score a bundle's segmentations against gold annotations
    EvalSeg(EvalSegArgs),
    /// Measure bits per character and per token on held-out text
    EvalEff(EvalEffArgs),
    /// Retrain at increasing annotation budgets and tabulate holdout scores
    Sweep(SweepArgs),
}

#[derive(Args)]
struct CorpusArgs {
    /// Training corpus path
    #[arg(long, value_name = "FILE")]
    corpus: Option<PathBuf>,

    /// Corpus layout: raw `text` (one document per line) or a `freq`
    /// count<TAB>chunk table
    #[arg(long, value_name = "KIND")]
    corpus_format: Option<String>,
}

#[derive(Args)]
struct TrainKnobs {
    /// Seed for every random choice the command makes
    #[arg(long)]
    seed: Option<u64>,

    /// Corpus cost weight
    #[arg(long)]
    alpha: Option<f64>,

    /// Annotation cost weight; omit to derive it from the data
    #[arg(long)]
    beta: Option<f64>,

    /// Convergence threshold in bits; omit to derive it from the data
    #[arg(long)]
    epsilon: Option<f64>,

    /// Upper bound on training epochs
    #[arg(long)]
    max_epochs: Option<u32>,
}

#[derive(Args)]
struct TrainMorfessorArgs {
    #[command(flatten)]
    corpus: CorpusArgs,

    /// Gold annotations; presence switches to semi-supervised training
    #[arg(long, value_name = "FILE")]
    annotations: Option<PathBuf>,

    /// Model file to write
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,

    #[command(flatten)]
    knobs: TrainKnobs,
}

#[derive(Args)]
struct TrainBpeArgs {
    #[command(flatten)]
    corpus: CorpusArgs,

    /// Total vocabulary size, byte symbols and marker included
    #[arg(long)]
    vocab_size: Option<usize>,

    /// Merge list file to write
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildTokenizerArgs {
    #[command(flatten)]
    corpus: CorpusArgs,

    /// Trained segmentation model file
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,

    /// Tokenizer variant: morph or mixed
    #[arg(long)]
    variant: Option<String>,

    /// Total vocabulary size including the 4 special tokens
    #[arg(long)]
    vocab_size: Option<usize>,

    /// Fraction of the non-special vocabulary given to morph entries
    #[arg(long)]
    morph_ratio: Option<f64>,

    /// Bundle directory to write
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CodecArgs {
    /// Bundle directory
    #[arg(long, value_name = "DIR")]
    bundle: Option<PathBuf>,

    /// Input file; stdin when omitted
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,

    /// Output file; stdout when omitted
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,

    /// Wrap each tokenized line in begin/end sentinel ids
    #[arg(long)]
    add_sentinels: bool,
}

#[derive(Args)]
struct EvalSegArgs {
    /// Bundle directory
    #[arg(long, value_name = "DIR")]
    bundle: Option<PathBuf>,

    /// Gold annotations to score against
    #[arg(long, value_name = "FILE")]
    annotations: Option<PathBuf>,

    /// Report format: table or kv
    #[arg(long)]
    format: Option<String>,

    /// Report file; stdout when omitted
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalEffArgs {
    /// Bundle directory
    #[arg(long, value_name = "DIR")]
    bundle: Option<PathBuf>,

    /// Text file; the first half of its lines trains the language model,
    /// the second half is scored
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,

    /// Language model order, 1 or 2
    #[arg(long)]
    order: Option<u8>,

    /// Add-k smoothing constant
    #[arg(long)]
    smoothing_k: Option<f64>,

    /// Report format: table or kv
    #[arg(long)]
    format: Option<String>,

    /// Report file; stdout when omitted
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    corpus: CorpusArgs,

    /// Pool of gold annotations budgets draw from
    #[arg(long, value_name = "FILE")]
    annotations: Option<PathBuf>,

    /// Held-out annotated words, disjoint from the annotation pool
    #[arg(long, value_name = "FILE")]
    holdout: Option<PathBuf>,

    /// Comma-separated annotation budgets, e.g. 0,50,100
    #[arg(long)]
    ratios: Option<String>,

    #[command(flatten)]
    knobs: TrainKnobs,

    /// Sweep table file; stdout when omitted
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let settings = settings::Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::TrainMorfessor(args) => commands::train_morfessor(args, &settings),
        Command::TrainBpe(args) => commands::train_bpe(args, &settings),
        Command::BuildTokenizer(args) => commands::build_tokenizer(args, &settings),
        Command::Tokenize(args) => commands::tokenize(args, &settings),
        Command::Detokenize(args) => commands::detokenize(args, &settings),
        Command::EvalSeg(args) => commands::eval_seg(args, &settings),
        Command::EvalEff(args) => commands::eval_eff(args, &settings),
        Command::Sweep(args) => commands::sweep(args, &settings),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let explicit_help = matches!(
                e.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            );
            let _ = e.print();
            // Asking for help succeeds; everything else is bad usage.
            return if explicit_help {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
