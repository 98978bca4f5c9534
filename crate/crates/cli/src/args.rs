use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Directory holding `TRAIN_FILE.TXT` when `--train` is omitted.
pub const DATA_DIR_ENV: &str = "RELCLASS_DATA_DIR";
pub const DEFAULT_TRAIN_FILE: &str = "TRAIN_FILE.TXT";

#[derive(Debug, Parser)]
#[command(name = "relclass", version, about = "Relation classification with CNNs and RNNs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and write checkpoint, manifest and log.
    Train(TrainArgs),
    /// Label a corpus with a trained checkpoint.
    Predict(PredictArgs),
    /// Score prediction files against gold labels.
    Eval(EvalArgs),
    /// Combine predictions by plurality vote.
    Ensemble(EnsembleArgs),
    /// Finite-difference check of a toy model's gradients.
    Gradcheck(GradcheckArgs),
    /// Write a synthetic corpus in SemEval format.
    Synth(SynthArgs),
    /// List presets, or print one preset's settings.
    Presets(PresetsArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Preset or architecture alias (see `relclass presets`).
    #[arg(long, visible_alias = "arch", default_value = "er-cnn")]
    pub preset: String,
    /// Settings file (`key = value`) applied over the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Single setting override, `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Training corpus; defaults to $RELCLASS_DATA_DIR/TRAIN_FILE.TXT.
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Separate development corpus; otherwise split off the training data.
    #[arg(long)]
    pub dev: Option<PathBuf>,
    /// Sentences held out for development when `--dev` is absent.
    #[arg(long, default_value_t = 1500)]
    pub dev_size: usize,
    /// Use only the first N training sentences (before the dev split).
    #[arg(long)]
    pub limit: Option<usize>,
    /// Pretrained word vectors (word2vec text format).
    #[arg(long)]
    pub emb: Option<PathBuf>,
    /// Corpora whose words should keep their pretrained vectors.
    #[arg(long)]
    pub extra_vocab: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Stop once training accuracy reaches this fraction.
    #[arg(long)]
    pub stop_at_train_accuracy: Option<f64>,
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Corpus to label (SemEval format or token cache; labels optional).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Append the raw label scores to every line.
    #[arg(long)]
    pub scores: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Answer key, labeled SemEval file or token cache.
    #[arg(long)]
    pub gold: PathBuf,
    /// Prediction files to score; with exactly two, also run the z-test.
    pub predictions: Vec<PathBuf>,
    /// Compare two prediction files with the significance test.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pub compare: Option<Vec<PathBuf>>,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    /// Prediction files to combine.
    pub predictions: Vec<PathBuf>,
    /// Checkpoints to run on `--input` and add to the vote.
    #[arg(long = "model", requires = "input")]
    pub models: Vec<PathBuf>,
    /// Corpus the `--model` checkpoints are applied to.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    /// Preset or alias; `all` checks every preset.
    #[arg(long, visible_alias = "preset", default_value = "all")]
    pub arch: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub sentences: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    /// Check at most this many coordinates per tensor.
    #[arg(long)]
    pub coords: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 100)]
    pub sentences: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PresetsArgs {
    pub name: Option<String>,
}
