//! Subcommands behind the `sentlex` binary.
//!
//! Every command reads its inputs, writes CSV/text outputs into
//! `--output-dir` and prints aligned tables to stdout. Outputs depend only
//! on inputs, options and `--seed`; the worker count never changes a byte.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::lexicon::{load_lexicon, Lexicon, ScoreMethod, ThresholdConfig};
use crate::models::{ClassWeight, ModelKind};
use crate::seed::DEFAULT_SEED;
use crate::textpipe::{PipelineConfig, ReductionMode};

mod assess;
mod pipeline;
mod train;

pub use assess::{cmd_assess, PersonalityReport};
pub use pipeline::{cmd_explore, cmd_preprocess, cmd_relabel};
pub use train::{cmd_evaluate, cmd_train_eval};

#[derive(Debug, Clone, Parser)]
#[command(
    name = "sentlex",
    version,
    about = "Lexicon-based tweet sentiment labeling and classifier comparison"
)]
#[command(args_override_self = true)]
pub struct RunConfig {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Seed for every stochastic stage.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Clean and tokenize a raw corpus.
    Preprocess(PreprocessArgs),
    /// Assign three-class labels with a lexicon scorer.
    Relabel(RelabelArgs),
    /// Word-frequency tables per class.
    Explore(ExploreArgs),
    /// Train and evaluate models across splits.
    Train(TrainArgs),
    /// Score a saved model on a labeled corpus.
    Evaluate(EvaluateArgs),
    /// Label one account's tweets and summarize them.
    Assess(AssessArgs),
}

#[derive(Debug, Clone, Args)]
pub struct IoArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "out")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    /// Token reduction: stem, lemmatize or none.
    #[arg(long, default_value = "stem")]
    pub reduction: ReductionMode,
}

impl PipelineArgs {
    pub fn config(&self) -> PipelineConfig {
        PipelineConfig::bundled_with(self.reduction)
    }
}

#[derive(Debug, Clone, Args)]
pub struct LexiconArgs {
    /// Lexicon TSV (default: the bundled lexicon).
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = -0.05, allow_negative_numbers = true)]
    pub neutral_low: f64,
    #[arg(long, default_value_t = 0.05)]
    pub neutral_high: f64,
    #[arg(long, default_value_t = 0.05)]
    pub pattern_epsilon: f64,
}

impl LexiconArgs {
    /// The lexicon with keys reduced the same way as document tokens.
    pub fn load(&self, pipeline: &PipelineConfig) -> Result<Lexicon> {
        let lex = match &self.lexicon {
            Some(p) => load_lexicon(p)?,
            None => Lexicon::bundled(),
        };
        Ok(lex.reduced(pipeline))
    }

    pub fn thresholds(&self) -> Result<ThresholdConfig> {
        ThresholdConfig::new(self.neutral_low, self.neutral_high, self.pattern_epsilon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// Six-column Sentiment140 CSV.
    Sentiment140,
    /// Newline-delimited JSON with a `text` field.
    Dump,
}

#[derive(Debug, Clone, Args)]
pub struct PreprocessArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long, value_enum, default_value = "sentiment140")]
    pub format: InputFormat,
    /// Read at most this many records.
    #[arg(long)]
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct RelabelArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[command(flatten)]
    pub lexicon: LexiconArgs,
    /// pattern (polarity) or valence (compound).
    #[arg(long, default_value = "valence")]
    pub method: ScoreMethod,
    /// Ignore zero-subjectivity tokens when scoring.
    #[arg(long)]
    pub drop_objective: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LabelSource {
    Original,
    Relabeled,
}

#[derive(Debug, Clone, Args)]
pub struct ExploreArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long, default_value_t = 8)]
    pub top_k: usize,
    #[arg(long, value_enum, default_value = "relabeled")]
    pub labels: LabelSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TruncationWeight {
    Valence,
    Polarity,
    Off,
}

#[derive(Debug, Clone, Args)]
pub struct HyperArgs {
    #[arg(long)]
    pub nb_alpha: Option<f64>,
    #[arg(long)]
    pub mlr_learning_rate: Option<f64>,
    #[arg(long)]
    pub mlr_l2: Option<f64>,
    #[arg(long)]
    pub mlr_epochs: Option<usize>,
    #[arg(long)]
    pub mlr_batch: Option<usize>,
    #[arg(long)]
    pub svm_c: Option<f64>,
    #[arg(long)]
    pub svm_epochs: Option<usize>,
    #[arg(long)]
    pub svm_learning_rate: Option<f64>,
    #[arg(long)]
    pub rf_trees: Option<usize>,
    /// Depth limit for forest trees (default: none).
    #[arg(long)]
    pub rf_max_depth: Option<usize>,
    #[arg(long)]
    pub rf_features_per_split: Option<usize>,
    #[arg(long)]
    pub rf_min_leaf: Option<usize>,
    /// Grow forest trees on the full training set instead of bootstrap samples.
    #[arg(long)]
    pub rf_no_bootstrap: bool,
    #[arg(long)]
    pub gbt_rounds: Option<usize>,
    #[arg(long)]
    pub gbt_depth: Option<usize>,
    #[arg(long)]
    pub gbt_shrinkage: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[command(flatten)]
    pub lexicon: LexiconArgs,
    /// Comma-separated models (nb, mlr, svm, rf, gbt) or `all`.
    #[arg(long, default_value = "all", value_delimiter = ',', action = ArgAction::Set)]
    pub models: Vec<String>,
    /// Comma-separated splits such as 70-30, or `all` for 60-40,70-30,80-20.
    #[arg(long, default_value = "all", value_delimiter = ',', action = ArgAction::Set)]
    pub splits: Vec<String>,
    /// Cross-validation folds on each training part; 0 disables it.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "relabeled")]
    pub labels: LabelSource,
    #[arg(long, default_value = "none")]
    pub class_weight: ClassWeight,
    /// Lexicon weight used to rank tokens for truncation.
    #[arg(long, value_enum, default_value = "valence")]
    pub truncation: TruncationWeight,
    /// Drop vocabulary terms seen in fewer documents.
    #[arg(long, default_value_t = 1)]
    pub min_df: usize,
    /// Skip writing model files.
    #[arg(long)]
    pub no_save_models: bool,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long, value_enum, default_value = "relabeled")]
    pub labels: LabelSource,
}

#[derive(Debug, Clone, Args)]
pub struct AssessArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[command(flatten)]
    pub lexicon: LexiconArgs,
    /// Lexicon method used to label tweets when no model is given.
    #[arg(long, default_value = "valence")]
    pub method: ScoreMethod,
    /// Saved model; requires --vocab.
    #[arg(long, requires = "vocab")]
    pub model: Option<PathBuf>,
    #[arg(long, requires = "model")]
    pub vocab: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    pub top_k: usize,
}

/// Process exit status for a failed command: 2 for bad input or usage,
/// 1 for failures during training or other internal errors.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Training(_) | Error::NonFinite(_) => 1,
        Error::Io { .. }
        | Error::Parse { .. }
        | Error::EmptyLexicon(_)
        | Error::InvalidArgument(_)
        | Error::DimensionMismatch { .. }
        | Error::ModelVersion { .. }
        | Error::CorruptModel(_)
        | Error::Csv(_) => 2,
    }
}

/// Runs the selected subcommand inside a pool of `threads` workers.
pub fn run(config: &RunConfig) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        if t == 0 {
            return Err(Error::InvalidArgument("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match &config.command {
        Command::Preprocess(a) => cmd_preprocess(a),
        Command::Relabel(a) => cmd_relabel(a),
        Command::Explore(a) => cmd_explore(a),
        Command::Train(a) => cmd_train_eval(a, config.seed),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Assess(a) => cmd_assess(a),
    })
}

const SUBCOMMANDS: [&str; 6] = ["preprocess", "relabel", "explore", "train", "evaluate", "assess"];

/// Expands `--config FILE` (or `--config=FILE`) into flags.
///
/// The file holds `key = value` lines; `#` starts a comment. Each key is a
/// long flag name without dashes. `true` turns a switch on, `false` leaves
/// it off. The expanded flags are placed right after the subcommand, ahead
/// of the user's own flags, so flags on the command line win.
pub fn expand_config_args(args: Vec<String>) -> Result<Vec<String>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut file: Option<PathBuf> = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            let p = it
                .next()
                .ok_or_else(|| Error::InvalidArgument("--config needs a file path".into()))?;
            file = Some(PathBuf::from(p));
        } else if let Some(p) = a.strip_prefix("--config=") {
            file = Some(PathBuf::from(p));
        } else {
            rest.push(a);
        }
    }
    let Some(file) = file else { return Ok(rest) };
    let extra = read_config_file(&file)?;
    match rest.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) {
        Some(pos) => {
            rest.splice(pos + 1..pos + 1, extra);
        }
        None => rest.extend(extra),
    }
    Ok(rest)
}

fn read_config_file(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected key = value, got {line:?}"),
            });
        };
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim();
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            _ => {
                out.push(format!("--{key}"));
                out.push(value.to_string());
            }
        }
    }
    Ok(out)
}

pub(crate) fn parse_models(names: &[String]) -> Result<Vec<ModelKind>> {
    let mut out = Vec::new();
    for n in names {
        if n.trim().eq_ignore_ascii_case("all") {
            out.extend(ModelKind::ALL);
        } else {
            out.push(n.parse()?);
        }
    }
    let mut seen = HashSet::new();
    out.retain(|m| seen.insert(*m));
    if out.is_empty() {
        return Err(Error::InvalidArgument("no models selected".into()));
    }
    Ok(out)
}

pub(crate) fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub(crate) fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "input file not found"),
        ))
    }
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes through a buffer, mapping errors to the file path.
pub(crate) fn write_file(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}
