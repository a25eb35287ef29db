//! Subcommand implementations.
//!
//! Every handler loads and computes everything first and only then
//! creates the output directory and writes, so a failing run leaves no
//! partial artifacts. All output lands inside the directory given by
//! `--out`, and reruns with identical inputs rewrite identical bytes.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use squentropy::calibration::CalibrationReport;
use squentropy::config::{parse_hidden, RunConfig, RunReport, SweepReport};
use squentropy::data::{
    generate_spiral, load_csv, load_csv_pair, split, standardize, CsvOptions, Dataset,
    FeatureStats, SpiralConfig,
};
use squentropy::diagnostics::{
    boundary_raster, histogram_svg, raster_svg, reliability_svg, series_csv, weight_norm_series,
    weight_norm_svg, Bounds, ChartStyle,
};
use squentropy::error::{Error, Result};
use squentropy::mlp::MlpParameters;
use squentropy::trainer::{accuracy, evaluate, summarize, train as train_model, SeedRun};
use squentropy::BatchSize;

use crate::{ConfigArgs, DataArgs, EvalArgs, ReportArgs, SpiralArgs, SweepArgs, TrainArgs};

pub fn spiral(args: &SpiralArgs) -> Result<()> {
    let config = SpiralConfig {
        n_train: args.n_train,
        n_test: args.n_test,
        noise_sigma: args.noise,
        rotations: args.rotations,
        seed: args.seed,
    };
    let (train_set, test_set) = generate_spiral(&config)?;
    std::fs::create_dir_all(&args.out)?;
    let train_path = args.out.join("train.csv");
    train_set.save_csv(&train_path)?;
    let test_path = args.out.join("test.csv");
    test_set.save_csv(&test_path)?;
    println!("wrote {} ({} samples)", train_path.display(), train_set.n());
    println!("wrote {} ({} samples)", test_path.display(), test_set.n());
    Ok(())
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let config = resolve_config(&args.config)?;
    let (raw_train, raw_test) = load_datasets(&args.data, config.seed)?;
    let (train_set, test_set) = maybe_standardize(&config, raw_train, raw_test)?;
    let train_config = config.to_train_config(train_set.d(), train_set.class_count())?;

    let started = Instant::now();
    let (params, history) = train_model(&train_set, &train_config)?;
    let runtime = started.elapsed().as_secs_f64();

    let train_accuracy = accuracy(&params, &train_set);
    let (test_accuracy, calibration_report) = evaluate(&params, &test_set, config.bins_k);
    let report = RunReport {
        config: config.resolved_for(train_set.n()),
        history,
        test_accuracy,
        calibration_report,
        runtime_seconds: args.timing.then_some(runtime),
    };

    std::fs::create_dir_all(&args.out)?;
    let checkpoint_path = args.out.join("checkpoint.txt");
    params.save(&checkpoint_path)?;
    println!("wrote {}", checkpoint_path.display());
    let report_path = args.out.join("report.json");
    std::fs::write(&report_path, report.to_json())?;
    println!("wrote {}", report_path.display());
    println!("train_accuracy = {train_accuracy:.6}");
    println!("test_accuracy = {test_accuracy:.6}");
    println!("ece = {:.6}", report.calibration_report.ece);
    Ok(())
}

/// What `eval` writes as `eval.json`.
#[derive(Serialize)]
struct EvalReport<'a> {
    test_accuracy: f64,
    calibration_report: &'a CalibrationReport,
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let params = MlpParameters::load(&args.checkpoint)?;
    let options = csv_options(args.header, args.label_col);
    let test_set = match &args.train {
        Some(train_path) => {
            let (train_set, test_set) = load_csv_pair(train_path, &args.test, &options)?;
            if args.standardize {
                FeatureStats::measure(&train_set).apply(&test_set)?
            } else {
                test_set
            }
        }
        None => load_csv(&args.test, &options)?,
    };
    if test_set.d() != params.arch().input_dim() {
        return Err(Error::Data(format!(
            "test file has {} feature(s) but the checkpoint expects {}",
            test_set.d(),
            params.arch().input_dim()
        )));
    }
    if test_set.class_count() != params.arch().classes() {
        return Err(Error::Data(format!(
            "test file has {} classes but the checkpoint expects {}; pass --train \
             so both files share one label vocabulary",
            test_set.class_count(),
            params.arch().classes()
        )));
    }

    let (test_accuracy, calibration_report) = evaluate(&params, &test_set, args.bins);
    let report = EvalReport {
        test_accuracy,
        calibration_report: &calibration_report,
    };
    let mut json = serde_json::to_string_pretty(&report).expect("eval report serializes");
    json.push('\n');

    std::fs::create_dir_all(&args.out)?;
    let path = args.out.join("eval.json");
    std::fs::write(&path, json)?;
    println!("wrote {}", path.display());
    println!("test_accuracy = {test_accuracy:.6}");
    println!("ece = {:.6}", calibration_report.ece);
    Ok(())
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let base = resolve_config(&args.config)?;
    let seeds = parse_seeds(&args.seeds)?;
    let (raw_train, raw_test) = load_datasets(&args.data, base.seed)?;
    let (train_set, test_set) = maybe_standardize(&base, raw_train, raw_test)?;
    // Surface architecture problems once, before fanning out.
    base.to_train_config(train_set.d(), train_set.class_count())?;

    // Seed runs are independent, so they may run in parallel; results are
    // collected back in seed order.
    let results: Vec<(SeedRun, RunReport)> = seeds
        .par_iter()
        .map(|&seed| {
            let config = RunConfig {
                seed,
                ..base.clone()
            };
            let train_config = config.to_train_config(train_set.d(), train_set.class_count())?;
            let (params, history) = train_model(&train_set, &train_config)?;
            let (test_accuracy, calibration_report) = evaluate(&params, &test_set, config.bins_k);
            let run = SeedRun {
                seed,
                test_accuracy,
                test_ece: calibration_report.ece,
            };
            let report = RunReport {
                config: config.resolved_for(train_set.n()),
                history,
                test_accuracy,
                calibration_report,
                runtime_seconds: None,
            };
            Ok((run, report))
        })
        .collect::<Result<_>>()?;
    let (runs, reports): (Vec<SeedRun>, Vec<RunReport>) = results.into_iter().unzip();
    let sweep_report = SweepReport {
        config: base.resolved_for(train_set.n()),
        summary: summarize(runs),
    };

    std::fs::create_dir_all(&args.out)?;
    for report in &reports {
        let path = args.out.join(format!("report-{}.json", report.config.seed));
        std::fs::write(&path, report.to_json())?;
        println!("wrote {}", path.display());
    }
    let path = args.out.join("sweep_summary.json");
    std::fs::write(&path, sweep_report.to_json())?;
    println!("wrote {}", path.display());
    let summary = &sweep_report.summary;
    println!(
        "mean_accuracy = {:.6} (std {:.6})",
        summary.mean_accuracy, summary.std_accuracy
    );
    println!(
        "mean_ece = {:.6} (std {:.6})",
        summary.mean_ece, summary.std_ece
    );
    Ok(())
}

pub fn report(args: &ReportArgs) -> Result<()> {
    if args.reports.is_empty() && args.checkpoint.is_none() {
        return Err(Error::InvalidArgument(
            "nothing to render: pass --report files and/or --checkpoint with --data".into(),
        ));
    }
    let mut loaded: Vec<RunReport> = Vec::new();
    for path in &args.reports {
        let text = std::fs::read_to_string(path)?;
        let report = RunReport::from_json(&text)
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        loaded.push(report);
    }

    // Render every artifact to memory before touching the filesystem.
    let style = ChartStyle::default();
    let mut artifacts: Vec<(&str, String)> = Vec::new();
    if let Some(first) = loaded.first() {
        artifacts.push((
            "reliability.svg",
            reliability_svg(&first.calibration_report, &style),
        ));
        artifacts.push((
            "histogram.svg",
            histogram_svg(&first.calibration_report, &style),
        ));
        let histories: Vec<(&str, &[_])> = loaded
            .iter()
            .map(|r| (r.config.loss.as_str(), r.history.as_slice()))
            .collect();
        let rows = weight_norm_series(&histories)?;
        artifacts.push(("weight_norms.csv", series_csv(&rows)));
        artifacts.push(("weight_norms.svg", weight_norm_svg(&rows, &style)));
    }
    if let (Some(checkpoint), Some(data_path)) = (&args.checkpoint, &args.data) {
        let params = MlpParameters::load(checkpoint)?;
        let options = csv_options(args.header, args.label_col);
        let mut dataset = load_csv(data_path, &options)?;
        if args.standardize {
            dataset = FeatureStats::measure(&dataset).apply(&dataset)?;
        }
        let bounds = Bounds::of_dataset(&dataset, 0.1)?;
        let raster = boundary_raster(&params, &bounds, args.resolution)?;
        artifacts.push(("boundary.csv", raster.to_csv_string()));
        artifacts.push(("boundary.svg", raster_svg(&raster, &style)));
    }

    std::fs::create_dir_all(&args.out)?;
    for (name, content) in &artifacts {
        let path = args.out.join(name);
        std::fs::write(&path, content)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Builds the effective run configuration: preset defaults, then the
/// config file, then individual flags.
fn resolve_config(args: &ConfigArgs) -> Result<RunConfig> {
    let mut config = match args.preset.as_str() {
        "spiral" => RunConfig::spiral_defaults(),
        _ => RunConfig::default(),
    };
    if let Some(path) = &args.config {
        config.apply_file(path)?;
    }
    if let Some(v) = &args.loss {
        config.loss = v.clone();
    }
    if let Some(v) = args.t {
        config.t = v;
    }
    if let Some(v) = args.m {
        config.m = v;
    }
    if let Some(v) = args.lr {
        config.lr = v;
    }
    if let Some(v) = args.wd {
        config.weight_decay = v;
    }
    if let Some(v) = args.epochs {
        config.epochs = v;
    }
    if let Some(v) = &args.batch {
        config.batch_size = BatchSize::parse(v)?;
    }
    if let Some(v) = &args.hidden {
        config.hidden = parse_hidden(v)?;
    }
    if let Some(v) = args.bins {
        config.bins_k = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if args.no_standardize {
        config.standardize = false;
    }
    if args.no_shuffle {
        config.shuffle = false;
    }
    config.validate()?;
    Ok(config)
}

fn csv_options(header: bool, label_col: Option<usize>) -> CsvOptions {
    CsvOptions {
        has_header: header,
        label_column: label_col,
        ..CsvOptions::default()
    }
}

/// Produces the train/test pair from either two files (shared label
/// vocabulary) or one file split with the run seed.
fn load_datasets(args: &DataArgs, split_seed: u64) -> Result<(Dataset, Dataset)> {
    let options = csv_options(args.header, args.label_col);
    match (&args.train, &args.test, &args.data) {
        (Some(train), Some(test), None) => load_csv_pair(train, test, &options),
        (None, None, Some(data)) => {
            let all = load_csv(data, &options)?;
            split(&all, args.test_fraction, split_seed)
        }
        (Some(_), None, None) => Err(Error::InvalidArgument(
            "--train needs --test (or use --data to split one file)".into(),
        )),
        (None, Some(_), None) => Err(Error::InvalidArgument(
            "--test needs --train (or use --data to split one file)".into(),
        )),
        (None, None, None) => Err(Error::InvalidArgument(
            "no input data: pass --train with --test, or --data".into(),
        )),
        _ => unreachable!("clap rejects --data combined with --train/--test"),
    }
}

fn maybe_standardize(
    config: &RunConfig,
    train_set: Dataset,
    test_set: Dataset,
) -> Result<(Dataset, Dataset)> {
    if !config.standardize {
        return Ok((train_set, test_set));
    }
    let (train_std, test_std, _) = standardize(&train_set, &test_set)?;
    Ok((train_std, test_std))
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let seeds: Vec<u64> = s
        .split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<u64>().map_err(|_| {
                Error::InvalidArgument(format!("seed \"{part}\" is not an unsigned integer"))
            })
        })
        .collect::<Result<_>>()?;
    if seeds.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "a sweep needs at least two seeds, got {}",
            seeds.len()
        )));
    }
    let mut sorted = seeds.clone();
    sorted.sort_unstable();
    if let Some(dup) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument(format!(
            "duplicate seed {} in sweep",
            dup[0]
        )));
    }
    Ok(seeds)
}
