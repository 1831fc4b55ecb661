// SPDX-License-Identifier: Apache-2.0

//! `relgraph`: synthetic benchmarks, timing paths, Monte-Carlo labels,
//! enclosing subgraphs, dataset splits, PNA training and evaluation.

mod commands;
mod files;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use relgraph_core::dataset::{Scenario, Target};
use relgraph_core::sta::{DelayMeasure, StressMode};

#[derive(Debug, Parser)]
#[command(name = "relgraph", version, about)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, env = "RELGRAPH_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rewrite a netlist as a canonical document.
    Convert(ConvertArgs),
    /// Generate synthetic benchmark netlists.
    Synth(SynthArgs),
    /// Select the worst-slack timing paths of a design.
    Paths(PathsArgs),
    /// Label paths with Monte-Carlo variation or aging degradation.
    Label(LabelArgs),
    /// Cut labeled enclosing subgraphs into a sample file.
    Extract(ExtractArgs),
    /// Split sample files into train, validation and test sets.
    Split(SplitArgs),
    /// Train a PNA model on a split.
    Train(TrainArgs),
    /// Predict degradation for a sample file.
    Predict(PredictArgs),
    /// Score predictions against labels.
    Eval(EvalArgs),
    /// Run every stage into one output directory.
    All(AllArgs),
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long)]
    pub netlist: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SynthOpts {
    /// Number of designs.
    #[arg(long, default_value_t = 5)]
    pub designs: usize,
    /// Cell instances per design.
    #[arg(long, default_value_t = 2000)]
    pub gates: usize,
    /// Combinational logic depth.
    #[arg(long, default_value_t = 12)]
    pub depth: usize,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub synth: SynthOpts,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PathsArgs {
    #[arg(long)]
    pub netlist: PathBuf,
    /// Delay library; the bundled one by default.
    #[arg(long)]
    pub library: Option<PathBuf>,
    /// Paths to keep, one per end point.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    /// Only flip-flop end points.
    #[arg(long)]
    pub flops_only: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LabelMode {
    Variation,
    Aging,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Endpoint,
    Path,
}

impl From<MeasureArg> for DelayMeasure {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::Endpoint => DelayMeasure::Endpoint,
            MeasureArg::Path => DelayMeasure::Path,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StressArg {
    WorstCase,
    Random,
}

impl From<StressArg> for StressMode {
    fn from(s: StressArg) -> Self {
        match s {
            StressArg::WorstCase => StressMode::WorstCase,
            StressArg::Random => StressMode::Random,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct LabelOpts {
    #[arg(long, value_enum, default_value_t = LabelMode::Variation)]
    pub mode: LabelMode,
    /// Monte-Carlo instances per design.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(2..))]
    pub instances: u64,
    /// Delay a path's degradation is measured on.
    #[arg(long, value_enum, default_value_t = MeasureArg::Endpoint)]
    pub measure: MeasureArg,
    /// Per-gate stress in aging mode.
    #[arg(long, value_enum, default_value_t = StressArg::WorstCase)]
    pub stress: StressArg,
    /// Global factor on every cell's aging sensitivity.
    #[arg(long, default_value_t = 1.0)]
    pub aging_scale: f64,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    #[arg(long)]
    pub netlist: PathBuf,
    #[arg(long)]
    pub library: Option<PathBuf>,
    #[arg(long)]
    pub paths: PathBuf,
    #[command(flatten)]
    pub label: LabelOpts,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub netlist: PathBuf,
    #[arg(long)]
    pub paths: PathBuf,
    /// Label file to attach; samples are unlabeled without it.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Hops around the path.
    #[arg(long, default_value_t = 1)]
    pub hop: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Sample files, one or more designs.
    #[arg(long, num_args = 1.., required = true)]
    pub samples: Vec<PathBuf>,
    #[arg(long, default_value = "self_referencing")]
    pub scenario: Scenario,
    /// Test design of the cross-design scenarios, or the design to use for
    /// self-referencing when several are given.
    #[arg(long)]
    pub held_out: Option<String>,
    /// Output directory for the three sets and the manifest.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TrainOpts {
    #[arg(long, default_value = "mu")]
    pub target: Target,
    #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
    pub epochs: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch_size: u64,
    /// Train on z-scored labels.
    #[arg(long)]
    pub standardize: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Directory written by `split`.
    #[arg(long)]
    pub split: PathBuf,
    #[command(flatten)]
    pub train: TrainOpts,
    /// Output directory for the checkpoint, log and report.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Checkpoint written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub predictions: PathBuf,
    /// Label files written by `label`.
    #[arg(long, num_args = 1.., required = true)]
    pub labels: Vec<PathBuf>,
    #[arg(long, default_value = "mu")]
    pub target: Target,
    /// Metrics file; printed to stdout either way.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AllArgs {
    /// Input netlists; synthetic designs are generated when omitted.
    #[arg(long, num_args = 1..)]
    pub netlist: Vec<PathBuf>,
    #[command(flatten)]
    pub synth: SynthOpts,
    #[arg(long)]
    pub library: Option<PathBuf>,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    #[command(flatten)]
    pub label: LabelOpts,
    #[arg(long, default_value_t = 1)]
    pub hop: usize,
    #[arg(long, default_value = "self_referencing")]
    pub scenario: Scenario,
    /// Test design; the last design by default.
    #[arg(long)]
    pub held_out: Option<String>,
    #[command(flatten)]
    pub train: TrainOpts,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("configuring the thread pool")?;
    }
    let seed = cli.seed;
    match cli.command {
        Command::Convert(a) => commands::convert(&a),
        Command::Synth(a) => commands::synth(&a.synth, &a.out, seed).map(|_| ()),
        Command::Paths(a) => commands::paths(&a),
        Command::Label(a) => commands::label(&a, seed),
        Command::Extract(a) => commands::extract(&a),
        Command::Split(a) => commands::split(&a, seed),
        Command::Train(a) => commands::train(&a.split, &a.train, &a.out, seed),
        Command::Predict(a) => commands::predict(&a),
        Command::Eval(a) => commands::eval(&a).map(|_| ()),
        Command::All(a) => commands::all(&a, seed),
    }
}
