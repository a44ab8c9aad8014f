//! `well`: curriculum extraction, self-paced training, evaluation and benchmark sweeps.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] well_core::Error),
    /// Some units of work failed; their diagnostics were already reported.
    #[error("{0}")]
    Partial(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(_) | CliError::Partial(_) => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "well",
    version,
    about = "Webly-labeled concept detector training"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Curriculum extraction from web metadata.
    #[command(subcommand)]
    Curriculum(CurriculumCommand),
    /// Train one detector per concept from curriculum labels.
    Train(TrainArgs),
    /// Evaluate trained detectors on a gold-labeled dataset.
    Eval(EvalArgs),
    /// Synthetic benchmark sweeps.
    #[command(subcommand)]
    Sweep(SweepCommand),
    /// Synthetic benchmark data.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Configuration helpers.
    #[command(subcommand)]
    Config(ConfigCommand),
}

#[derive(Subcommand, Debug)]
enum CurriculumCommand {
    /// Score every (sample, concept) pair and write the curriculum JSONL.
    Build(CurriculumArgs),
}

#[derive(Subcommand, Debug)]
enum SweepCommand {
    /// Vary the curriculum precision.
    Noise(SweepArgs),
    /// Vary the training set size.
    Size(SweepArgs),
}

#[derive(Subcommand, Debug)]
enum SynthCommand {
    /// Write a synthetic benchmark instance to a directory.
    Generate(SynthArgs),
}

#[derive(Subcommand, Debug)]
enum ConfigCommand {
    /// Print every configuration key with its default value.
    Schema {
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Options shared by every data-processing command.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// JSON run configuration; unknown keys are rejected.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run seed, overriding the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to all cores); outputs do not depend on it.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Exact,
    Stem,
    Embedding,
    LatentTopic,
    LtWe,
    LtWeMultimodal,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Batch,
    Spl,
    Well,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RegularizerArg {
    Linear,
    Dropout,
}

#[derive(Args, Debug)]
pub struct CurriculumArgs {
    #[command(flatten)]
    pub common: Common,
    /// Dataset JSONL.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// JSON list of {"id", "words"} concepts; defaults to the gold label set.
    #[arg(long)]
    pub concepts: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Word-vector text file, required by embedding-based methods.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Previously fitted topic model JSON; fitted from the dataset when absent.
    #[arg(long)]
    pub topics: Option<PathBuf>,
    /// Output curriculum JSONL.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    /// Training dataset JSONL.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Curriculum JSONL from `curriculum build`.
    #[arg(long)]
    pub curriculum: Option<PathBuf>,
    #[arg(long)]
    pub concepts: Option<PathBuf>,
    /// Gold-labeled dataset used to pick the reported iteration.
    #[arg(long)]
    pub validation: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    pub regularizer: Option<RegularizerArg>,
    /// Output directory for per-concept reports and the manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    /// Gold-labeled test dataset JSONL.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Directory written by `train`.
    #[arg(long)]
    pub models: Option<PathBuf>,
    #[arg(long)]
    pub concepts: Option<PathBuf>,
    /// Metrics CSV; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated axis values (precisions or positives per concept).
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    /// Comma-separated benchmark seeds.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Option<Vec<ModeArg>>,
    #[arg(long, value_enum)]
    pub regularizer: Option<RegularizerArg>,
    /// Output directory: sweep.csv, plot.tsv and resumable cell files.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: Common,
    /// Curriculum precision of the generated instance.
    #[arg(long)]
    pub precision: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Curriculum(CurriculumCommand::Build(args)) => commands::curriculum(args),
        Command::Train(args) => commands::train(args),
        Command::Eval(args) => commands::eval(args),
        Command::Sweep(SweepCommand::Noise(args)) => {
            commands::sweep(args, well_core::synth::SweepAxis::Precision)
        }
        Command::Sweep(SweepCommand::Size(args)) => {
            commands::sweep(args, well_core::synth::SweepAxis::Size)
        }
        Command::Synth(SynthCommand::Generate(args)) => commands::synth(args),
        Command::Config(ConfigCommand::Schema { out }) => commands::config_schema(out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
