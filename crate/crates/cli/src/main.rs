//! `palmkit`: synthetic corpora, enrollment, identification and
//! identification experiments for four-band palmprints.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{DistanceArg, PipelineArgs};

/// Exit statuses.
const EXIT_RUNTIME: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_THRESHOLD: u8 = 3;

#[derive(Debug)]
pub enum Failure {
    /// Bad flags or configuration.
    Usage(String),
    Runtime(anyhow::Error),
    /// A `--min-accuracy` check failed after a successful run.
    Threshold(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<palmkit::Error> for Failure {
    fn from(e: palmkit::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

#[derive(Debug, Parser)]
#[command(name = "palmkit", version, about = "Multispectral palmprint identification toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a deterministic synthetic four-band corpus
    Synth(SynthArgs),
    /// Build a gallery file from a corpus directory
    Enroll(EnrollArgs),
    /// Identify one probe sample against a gallery
    Identify(IdentifyArgs),
    /// Run repeated-split identification experiments
    Evaluate(EvaluateArgs),
    /// Print the line and wavelet features of one sample as CSV
    DumpFeatures(DumpArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Png,
    Pgm,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Number of subjects (palms)
    #[arg(long)]
    subjects: usize,
    /// Samples per subject
    #[arg(long)]
    samples: usize,
    /// Image side in pixels; a positive multiple of 8
    #[arg(long, default_value_t = 128, value_parser = parse_side)]
    side: usize,
    /// Master seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output directory; created if missing
    #[arg(long)]
    out: PathBuf,
    /// Image file format
    #[arg(long, value_enum, default_value_t = FormatArg::Png)]
    format: FormatArg,
}

#[derive(Debug, Args)]
struct EnrollArgs {
    /// TOML file with pipeline settings (overridden by flags)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Corpus directory laid out as <subject>/<index>_<R|G|B|N>.<png|pgm>
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Gallery file to write
    #[arg(long)]
    out: PathBuf,
    /// Sample indices to enroll, e.g. "0..5" (inclusive), "0,2,4" or "0..2,7"
    #[arg(long, conflicts_with = "train_count")]
    train_indices: Option<String>,
    /// Enroll this many samples per subject; the first ones, or a seeded
    /// random choice with --seed
    #[arg(long)]
    train_count: Option<usize>,
    /// Seed for --train-count selection
    #[arg(long, requires = "train_count")]
    seed: Option<u64>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("probe").required(true).args(["probe_files", "probe_dir"]))]
struct ProbeArgs {
    /// The four band images of the probe, in R G B N order
    #[arg(long, num_args = 4, value_names = ["R", "G", "B", "N"])]
    probe_files: Option<Vec<PathBuf>>,
    /// Subject directory holding the probe's band files
    #[arg(long, requires = "sample_index")]
    probe_dir: Option<PathBuf>,
    /// Sample index of the probe inside --probe-dir
    #[arg(long, requires = "probe_dir")]
    sample_index: Option<u32>,
}

#[derive(Debug, Args)]
struct IdentifyArgs {
    /// TOML file; only `distance` and `gallery` are read
    #[arg(long)]
    config: Option<PathBuf>,
    /// Gallery file written by `enroll`
    #[arg(long)]
    gallery: Option<PathBuf>,
    #[command(flatten)]
    probe: ProbeArgs,
    /// Distance between feature vectors [default: concat]
    #[arg(long, value_enum)]
    distance: Option<DistanceArg>,
    /// Write the full per-class score table as CSV
    #[arg(long)]
    scores_out: Option<PathBuf>,
    /// Warn when the fused-score gap to the runner-up is below this value
    #[arg(long)]
    warn_margin: Option<f64>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// TOML file with pipeline and experiment settings (overridden by flags)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Corpus directory
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Training samples per subject, one experiment each [default: 6]
    #[arg(long, value_delimiter = ',')]
    train_counts: Option<Vec<usize>>,
    /// Random splits per experiment [default: 10]
    #[arg(long)]
    repeats: Option<usize>,
    /// Master split seed; repeat r uses seed + r. Without it every repeat
    /// trains on the first samples of each subject
    #[arg(long)]
    seed: Option<u64>,
    /// Distance between feature vectors [default: concat]
    #[arg(long, value_enum)]
    distance: Option<DistanceArg>,
    /// Write the JSON report here
    #[arg(long)]
    json_out: Option<PathBuf>,
    /// Write per-probe decisions as CSV; with several train counts the
    /// count is inserted before the extension
    #[arg(long)]
    scores_out: Option<PathBuf>,
    /// Exit with status 3 if any mean hybrid accuracy falls below this
    #[arg(long)]
    min_accuracy: Option<f64>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
struct DumpArgs {
    /// TOML file with pipeline settings (overridden by flags)
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    probe: ProbeArgs,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

fn parse_side(s: &str) -> Result<usize, String> {
    let side: usize = s.parse().map_err(|e| format!("{e}"))?;
    if side == 0 || !side.is_multiple_of(8) {
        return Err(format!("{side} is not a positive multiple of 8"));
    }
    Ok(side)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Enroll(a) => commands::enroll(a),
        Command::Identify(a) => commands::identify(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::DumpFeatures(a) => commands::dump_features(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
        Err(Failure::Threshold(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_THRESHOLD)
        }
    }
}
