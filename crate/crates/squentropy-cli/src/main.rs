//! `squentropy`: train and calibrate small classifiers from the command
//! line.
//!
//! Five subcommands cover the whole pipeline: `spiral` generates the
//! two-spiral benchmark, `train` fits one model, `eval` scores a saved
//! checkpoint, `sweep` repeats a run over several seeds, and `report`
//! renders SVG figures from stored artifacts.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 data error (missing
//! or malformed inputs), 3 numeric divergence during training.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use squentropy::Error;

mod commands;

#[derive(Parser)]
#[command(
    name = "squentropy",
    version,
    about = "Training and calibration laboratory for squentropy, cross-entropy, and rescaled square loss"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the two-spiral benchmark as train.csv and test.csv
    Spiral(SpiralArgs),
    /// Train one model; writes checkpoint.txt and report.json
    Train(TrainArgs),
    /// Score a saved checkpoint on a test CSV; writes eval.json
    Eval(EvalArgs),
    /// Train once per seed; writes per-seed reports and sweep_summary.json
    Sweep(SweepArgs),
    /// Render SVG figures from stored reports and checkpoints
    Report(ReportArgs),
}

#[derive(Args)]
struct SpiralArgs {
    /// Training samples, half per class (must be even)
    #[arg(long, default_value_t = 1000)]
    n_train: usize,
    /// Test samples, half per class (must be even)
    #[arg(long, default_value_t = 500)]
    n_test: usize,
    /// Gaussian noise added to every coordinate
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    /// Full turns each spiral arm makes around the origin
    #[arg(long, default_value_t = 2.0)]
    rotations: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// Where the train and test sets come from: either two CSV files or one
/// file split in two.
#[derive(Args)]
struct DataArgs {
    /// Training CSV (use together with --test)
    #[arg(long)]
    train: Option<PathBuf>,
    /// Test CSV (use together with --train)
    #[arg(long)]
    test: Option<PathBuf>,
    /// Single CSV split into train and test parts, stratified by class
    #[arg(long, conflicts_with_all = ["train", "test"])]
    data: Option<PathBuf>,
    /// Fraction of --data that becomes the test set
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
    /// Skip the first CSV line
    #[arg(long)]
    header: bool,
    /// Zero-based label column (default: the last column)
    #[arg(long)]
    label_col: Option<usize>,
}

/// Training configuration layered as preset, then config file, then
/// individual flags; later layers win.
#[derive(Args)]
struct ConfigArgs {
    /// Starting defaults: "tabular" (64-128-64, lr 0.01, wd 5e-4, 400
    /// epochs) or "spiral" (12-12-12, lr 0.005, batch 16, 1000 epochs)
    #[arg(long, value_parser = ["tabular", "spiral"], default_value = "tabular")]
    preset: String,
    /// key = value config file applied over the preset
    #[arg(long)]
    config: Option<PathBuf>,
    /// Loss: "squentropy", "cross-entropy", or "square"
    #[arg(long)]
    loss: Option<String>,
    /// True-logit weight of the square loss
    #[arg(long)]
    t: Option<f64>,
    /// True-logit target of the square loss
    #[arg(long = "M")]
    m: Option<f64>,
    /// Learning rate
    #[arg(long)]
    lr: Option<f64>,
    /// Weight decay (biases are never decayed)
    #[arg(long)]
    wd: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Minibatch size: a number, "full", or "auto"
    #[arg(long)]
    batch: Option<String>,
    /// Hidden widths, comma separated; "none" for a linear model
    #[arg(long)]
    hidden: Option<String>,
    /// Calibration bins
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Feed the network raw features instead of standardized ones
    #[arg(long)]
    no_standardize: bool,
    /// Visit samples in dataset order every epoch
    #[arg(long)]
    no_shuffle: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// Record wall-clock seconds in the report (reruns stop being
    /// byte-identical)
    #[arg(long)]
    timing: bool,
    /// Output directory for checkpoint.txt and report.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Checkpoint written by `train`
    #[arg(long)]
    checkpoint: PathBuf,
    /// Test CSV
    #[arg(long)]
    test: PathBuf,
    /// Training CSV; supplies the shared label vocabulary and the
    /// standardization statistics
    #[arg(long)]
    train: Option<PathBuf>,
    /// Standardize features with statistics measured on --train; must
    /// match how the checkpoint was trained
    #[arg(long, requires = "train")]
    standardize: bool,
    /// Calibration bins
    #[arg(long, default_value_t = 15)]
    bins: usize,
    /// Skip the first CSV line
    #[arg(long)]
    header: bool,
    /// Zero-based label column (default: the last column)
    #[arg(long)]
    label_col: Option<usize>,
    /// Output directory for eval.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// Comma-separated list of at least two distinct seeds, e.g.
    /// "1,2,3,4,5"
    #[arg(long)]
    seeds: String,
    /// Output directory for report-<seed>.json files and
    /// sweep_summary.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Stored report.json files; the first supplies the calibration
    /// figures, all contribute weight-norm series named by their loss
    #[arg(long = "report", value_name = "FILE")]
    reports: Vec<PathBuf>,
    /// Checkpoint to raster into a decision-boundary figure
    #[arg(long, requires = "data")]
    checkpoint: Option<PathBuf>,
    /// Two-feature two-class CSV fixing the raster bounds (typically the
    /// training file)
    #[arg(long, requires = "checkpoint")]
    data: Option<PathBuf>,
    /// Standardize --data with its own statistics before rastering; must
    /// match how the checkpoint was trained
    #[arg(long, requires = "data")]
    standardize: bool,
    /// Raster cells per axis
    #[arg(long, default_value_t = 200)]
    resolution: usize,
    /// Skip the first CSV line
    #[arg(long)]
    header: bool,
    /// Zero-based label column (default: the last column)
    #[arg(long)]
    label_col: Option<usize>,
    /// Output directory for the rendered figures
    #[arg(long)]
    out: PathBuf,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidArgument(_) | Error::Config(_) => 1,
        Error::Csv { .. }
        | Error::Data(_)
        | Error::Checkpoint(_)
        | Error::Io(_)
        | Error::Json(_) => 2,
        Error::Divergence { .. } => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests print to stdout and succeed;
            // anything else is a usage error.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Spiral(args) => commands::spiral(args),
        Command::Train(args) => commands::train(args),
        Command::Eval(args) => commands::eval(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Report(args) => commands::report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
