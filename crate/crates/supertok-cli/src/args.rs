//! Command-line interface definition.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Tokenizer workbench: train two-stage subword/superword byte-fallback BPE
/// tokenizers, evaluate them on intrinsic metrics, and analyze vocabularies
/// and embeddings. Set SUPERTOK_LOG=info for progress logging.
#[derive(Parser)]
#[command(name = "supertok", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Train a tokenizer model from a corpus manifest.
    Train(TrainArgs),
    /// Encode stdin to token ids (or pieces), one output line per input line.
    Encode(EncodeArgs),
    /// Decode lines of token ids from stdin back to text.
    Decode(DecodeArgs),
    /// Merge trained tokenizers by rule stacking under per-model budgets.
    Merge(MergeArgs),
    /// Per-script vocabulary distribution of a model.
    VocabStats(VocabStatsArgs),
    /// Evaluate models on a language-tagged corpus and render a report.
    Eval(EvalArgs),
    /// Initialize embeddings for a new vocabulary from an old model's matrix.
    RetokInit(RetokInitArgs),
    /// Rank tokens by cosine distance to the dummy-embedding centroid.
    Glitch(GlitchArgs),
    /// Sweep one training axis and emit a consolidated fertility table.
    Ablate(AblateArgs),
}

#[derive(Args, Clone)]
pub struct TrainArgs {
    /// Corpus manifest (JSON list of {lang, path, max_lines}).
    #[arg(long)]
    pub corpus: PathBuf,
    /// Total vocabulary size |V| including byte, special and dummy tokens.
    #[arg(long)]
    pub vocab_size: u32,
    /// Transition point: absolute size (e.g. 360), fraction (0.9) or percent (90%).
    #[arg(long, default_value = "90%")]
    pub transition: String,
    /// twostage or onestage.
    #[arg(long, default_value = "twostage")]
    pub mode: String,
    /// whitespace, gpt2_style, script_agnostic or boundless_style.
    #[arg(long, default_value = "script_agnostic")]
    pub pattern: String,
    /// nfc, nfd, nfkc or identity.
    #[arg(long, default_value = "nfkc")]
    pub norm: String,
    /// Minimum pair frequency for a merge (1 = strict BPE).
    #[arg(long, default_value_t = 2)]
    pub min_pair_freq: u64,
    /// Special tokens, in id order (repeatable).
    #[arg(long = "special-token")]
    pub special_token: Vec<String>,
    /// Number of reserved dummy tokens with zero corpus occurrences.
    #[arg(long, default_value_t = 0)]
    pub dummy_tokens: u32,
    /// Comma-separated sentence delimiters as U+XXXX codepoints.
    #[arg(long)]
    pub sentence_delims: Option<String>,
    /// key=value config file; its entries override the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output model file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Print byte-escaped token pieces instead of ids.
    #[arg(long)]
    pub pieces: bool,
    /// Normalize with this form instead of the model's recorded form.
    /// Refused on mismatch unless --force is set.
    #[arg(long)]
    pub norm_override: Option<String>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Args)]
pub struct MergeArgs {
    /// PATH:BUDGET pairs; BUDGET counts learned rules taken from that model.
    #[arg(long = "model", required = true)]
    pub model: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct VocabStatsArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    pub format: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Evaluation corpus manifest.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Model files to evaluate (repeatable).
    #[arg(long = "model", required = true)]
    pub model: Vec<PathBuf>,
    /// Base model path for NSL, or "none" to skip NSL.
    #[arg(long)]
    pub base: Option<String>,
    /// Rényi order.
    #[arg(long, default_value_t = 2.5)]
    pub alpha: f64,
    /// Also report the macro (mean-of-ratios) fertility variant.
    #[arg(long)]
    pub macro_fertility: bool,
    /// Bold the best value per column in markdown output.
    #[arg(long)]
    pub bold: bool,
    /// Normalization form for corpus word/byte statistics.
    #[arg(long, default_value = "nfkc")]
    pub corpus_norm: String,
    /// csv, json or markdown.
    #[arg(long, default_value = "markdown")]
    pub format: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct RetokInitArgs {
    #[arg(long)]
    pub old_model: PathBuf,
    #[arg(long)]
    pub old_emb: PathBuf,
    #[arg(long)]
    pub new_model: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct GlitchArgs {
    #[arg(long)]
    pub emb: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Comma-separated dummy token ids; defaults to the model's reserved ones.
    #[arg(long)]
    pub dummies: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Ids strictly above this count as high-id; defaults to 90% of |V|.
    #[arg(long)]
    pub high_id_threshold: Option<u32>,
    /// Keep byte tokens (ids 0-255) in the candidate set.
    #[arg(long)]
    pub include_bytes: bool,
    /// Keep special tokens in the candidate set.
    #[arg(long)]
    pub include_special: bool,
    /// Keep the dummy rows themselves in the candidate set.
    #[arg(long)]
    pub include_dummies: bool,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    pub format: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub train: TrainArgs,
    /// Evaluation corpus manifest.
    #[arg(long)]
    pub eval_manifest: PathBuf,
    /// transition, vocab, data or norm.
    #[arg(long)]
    pub axis: String,
    /// Comma-separated sweep values for the chosen axis.
    #[arg(long)]
    pub values: String,
    /// Rényi order for evaluation.
    #[arg(long, default_value_t = 2.5)]
    pub alpha: f64,
    /// Parallel sweep points.
    #[arg(long, default_value_t = 2)]
    pub jobs: usize,
    /// markdown, csv or json.
    #[arg(long, default_value = "markdown")]
    pub format: String,
}
