use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cws_core::{CheckpointError, Error};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "cws", version, about = "Chinese word segmentation as character-level translation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a character vocabulary from segmented corpora.
    BuildVocab(BuildVocabArgs),
    /// Train an encoder-decoder model and write a checkpoint.
    Train(TrainArgs),
    /// Segment raw text, one sentence per line.
    Segment(SegmentArgs),
    /// Score a segmentation against gold: P, R and F1.
    Score(ScoreArgs),
    /// Synthesize a spelling-error training corpus.
    Corrupt(CorruptArgs),
    /// Repair system segmentations against the original lines.
    PostEdit(PostEditArgs),
}

#[derive(Args, Debug)]
pub struct BuildVocabArgs {
    /// Segmented corpus (repeat to combine several files).
    #[arg(long, required = true)]
    pub corpus: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Drop characters seen fewer times than this.
    #[arg(long, default_value_t = 1)]
    pub min_count: usize,
    /// Total vocabulary size including the four reserved tokens.
    #[arg(long)]
    pub max_size: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Embedding 32, hidden 64.
    Desk,
    /// Embedding 620, hidden 1000. Slow on a CPU.
    Large,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Optimizer {
    Adam,
    Sgd,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Gold segmented corpus (the targets).
    #[arg(long)]
    pub corpus: PathBuf,
    /// Raw source lines parallel to the corpus. Defaults to the corpus with
    /// spaces removed.
    #[arg(long)]
    pub source: Option<PathBuf>,
    #[arg(long)]
    pub vocab: PathBuf,
    /// Checkpoint to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, value_enum, default_value_t = Preset::Desk)]
    pub preset: Preset,
    #[arg(long)]
    pub embedding_dim: Option<usize>,
    #[arg(long)]
    pub hidden_dim: Option<usize>,
    #[arg(long)]
    pub max_output_factor: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Optimizer::Adam)]
    pub optimizer: Optimizer,
    /// Learning rate (default 1e-3 for Adam, 0.1 for SGD).
    #[arg(long)]
    pub lr: Option<f64>,
    /// Global gradient-norm clip; 0 disables clipping.
    #[arg(long, default_value_t = 5.0)]
    pub clip: f64,
    /// Per-epoch loss log. Defaults to `<out>.train.log`.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SegmentArgs {
    /// Raw text, one sentence per line.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Beam width; 1 decodes greedily.
    #[arg(long, default_value_t = 1)]
    pub beam: usize,
    /// Write the raw model output without post-editing.
    #[arg(long)]
    pub no_post_edit: bool,
    /// Overrides the output length factor stored in the checkpoint.
    #[arg(long)]
    pub max_output_factor: Option<f64>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
}

#[derive(Args, Debug)]
pub struct CorruptArgs {
    /// Gold segmented corpus.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Tab-separated `correct<TAB>wrong` word pairs.
    #[arg(long)]
    pub dict: PathBuf,
    /// Fraction of sentences to corrupt.
    #[arg(long, default_value_t = 0.5)]
    pub rate: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Writes `<prefix>.src`, `<prefix>.tgt` and `<prefix>.records.tsv`.
    #[arg(long)]
    pub out_prefix: PathBuf,
}

#[derive(Args, Debug)]
pub struct PostEditArgs {
    /// Original raw lines.
    #[arg(long)]
    pub original: PathBuf,
    /// System segmentations, parallel to the original.
    #[arg(long)]
    pub system: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::Data(_) | Error::Label { .. } => 3,
        Error::Checkpoint(_) | Error::Dimension { .. } | Error::Index { .. } | Error::Contract(_) => 4,
        Error::Io { .. } => 5,
        Error::Diverged { .. } => 6,
    }
}

fn hint(e: &Error) -> Option<&'static str> {
    match e {
        Error::Checkpoint(CheckpointError::VocabMismatch { .. }) => {
            Some("pass the vocabulary file the model was trained with")
        }
        Error::Checkpoint(CheckpointError::Truncated | CheckpointError::BadMagic) => {
            Some("the model file is damaged or not a checkpoint; retrain or copy it again")
        }
        Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => Some("check the path"),
        Error::Diverged { .. } => Some("lower --lr or --clip and retrain"),
        _ => None,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::BuildVocab(a) => commands::build_vocab(&a),
        Command::Train(a) => commands::train(&a),
        Command::Segment(a) => commands::segment(&a),
        Command::Score(a) => commands::score(&a),
        Command::Corrupt(a) => commands::corrupt(&a),
        Command::PostEdit(a) => commands::post_edit(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(h) = hint(&e) {
                eprintln!("hint: {h}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
