mod commands;
mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rnaseg_core::{FeatureSet, MatchMode, PipelineConfig};

use crate::config::ConfigFile;

#[derive(Debug, Parser)]
#[command(name = "rnaseg", version, about = "RNAscope dot segmentation for H-DAB tissue patches")]
struct Cli {
    /// TOML configuration file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Repeat for more logging.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a synthetic patch with known dot positions.
    Synth(commands::SynthArgs),
    /// Select candidate dot pixels.
    Candidates(commands::CandidatesArgs),
    /// Compute texture features for candidates.
    ExtractFeatures(commands::ExtractArgs),
    /// Fit a linear classifier to labelled feature rows.
    Train(commands::TrainArgs),
    /// Score feature rows with a model.
    Predict(commands::PredictArgs),
    /// Break a model's coefficient weight down by feature and channel.
    Analyze(commands::AnalyzeArgs),
    /// Detect dots in one patch.
    Segment(commands::SegmentArgs),
    /// Score detections against annotations.
    Evaluate(commands::EvaluateArgs),
    /// Score a grid of gray and area thresholds over annotated patches.
    Sweep(commands::SweepArgs),
    /// Segment many patches and summarize.
    Run(commands::RunArgs),
}

/// Flags that override configuration values.
#[derive(Debug, Default, Clone, Args)]
pub struct Overrides {
    /// Feature set: reduced or full.
    #[arg(long = "set")]
    pub feature_set: Option<FeatureSet>,
    /// Gray threshold for binarizing the confidence map.
    #[arg(long)]
    pub gray: Option<u8>,
    /// Minimum detection area in pixels.
    #[arg(long)]
    pub area: Option<usize>,
    /// Matching radius in pixels.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Use maximum-cardinality matching instead of greedy.
    #[arg(long)]
    pub optimal: bool,
}

impl Overrides {
    fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(s) = self.feature_set {
            cfg.feature_set = s;
        }
        if let Some(g) = self.gray {
            cfg.gray_threshold = g;
        }
        if let Some(a) = self.area {
            cfg.area_threshold = a;
        }
        if let Some(r) = self.radius {
            cfg.match_radius = r;
        }
        if self.optimal {
            cfg.match_mode = MatchMode::Optimal;
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<rnaseg_core::Error>() {
            return if e.is_input_error() { 1 } else { 2 };
        }
        if cause.is::<std::io::Error>() || cause.is::<csv::Error>() || cause.is::<toml::de::Error>() {
            return 1;
        }
    }
    2
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain()
        .any(|c| c.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let mut cfg = PipelineConfig::default();
    if let Some(path) = &cli.config {
        ConfigFile::load(path)?.apply(&mut cfg)?;
    }
    match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Candidates(a) => commands::candidates(a, cfg),
        Command::ExtractFeatures(a) => commands::extract(a, cfg),
        Command::Train(a) => commands::train(a, cfg),
        Command::Predict(a) => commands::predict(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Segment(a) => commands::segment(a, cfg),
        Command::Evaluate(a) => commands::evaluate(a, cfg),
        Command::Sweep(a) => commands::sweep(a, cfg),
        Command::Run(a) => commands::run(a, cfg),
    }
}
