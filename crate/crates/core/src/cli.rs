//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data validation error, 3 runtime
//! error. Every command validates and computes before touching its output
//! file, so a failed run never leaves a partial file behind.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::conformal::{
    conformal_rank, conformal_threshold, prediction_set, CalibrationScores, RiskLevel,
};
use crate::distribution::{filter_unanswerable, frequency_distribution, Dataset, DEFAULT_SAMPLING_COUNT};
use crate::error::Error;
use crate::harness::{sweep_alpha, sweep_split, with_workers, DEFAULT_TRIALS};
use crate::io::{
    dataset_to_jsonl, load_dataset, parse_axis, predictions_to_jsonl, read_sweep_csv, render_report,
    sweep_csv, write_atomically, PredictionRecord,
};
use crate::synthetic::{generate_dataset, GeneratorConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "conformal-mcq", version, about = "Split conformal prediction sets for multiple-choice QA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic exchangeable dataset as JSONL
    Generate(GenerateArgs),
    /// Print the calibrated threshold for one risk level
    Calibrate(CalibrateArgs),
    /// Emit prediction sets for test questions as JSONL
    Predict(PredictArgs),
    /// Sweep the risk level at a fixed split ratio and write CSV
    SweepAlpha(SweepAlphaArgs),
    /// Sweep the split ratio at a fixed risk level and write CSV
    SweepSplit(SweepSplitArgs),
    /// Pretty-print one or more sweep CSVs as a grid of mean error rates
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 1000)]
    records: usize,
    #[arg(long, default_value_t = 4)]
    options: usize,
    #[arg(long = "p", default_value_t = DEFAULT_SAMPLING_COUNT)]
    sampling_count: u32,
    #[arg(long, default_value_t = 1.0)]
    concentration: f64,
    #[arg(long, default_value_t = 0.7)]
    accuracy: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DataArgs {
    #[arg(long)]
    input: PathBuf,
    /// Required samples per question; inferred from the first record if unset
    #[arg(long = "p")]
    sampling_count: Option<u32>,
    /// Keep questions whose ground truth was never sampled
    #[arg(long)]
    no_filter: bool,
    /// Only use records with this `group` label
    #[arg(long)]
    group: Option<String>,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    alpha: f64,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Calibration questions
    #[arg(long)]
    calibration: PathBuf,
    /// Questions to predict on
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long = "p")]
    sampling_count: Option<u32>,
    /// Keep calibration questions whose ground truth was never sampled
    #[arg(long)]
    no_filter: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; results do not depend on this
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepAlphaArgs {
    #[command(flatten)]
    common: SweepArgs,
    /// Calibration fraction
    #[arg(long, default_value_t = 0.5)]
    ratio: f64,
    /// `start:stop:step` or comma-separated list
    #[arg(long, default_value = "0.1:0.9:0.1")]
    alpha: String,
}

#[derive(Debug, Args)]
struct SweepSplitArgs {
    #[command(flatten)]
    common: SweepArgs,
    /// `start:stop:step` or comma-separated list of calibration fractions
    #[arg(long, default_value = "0.1:0.9:0.1")]
    ratio: String,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Sweep CSV files, one table row each
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Row labels, in the same order as the inputs; defaults to file stems
    #[arg(long, num_args = 1..)]
    label: Vec<String>,
}

/// Failure carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BadRange { .. } | Error::InvalidRiskLevel(_) => EXIT_USAGE,
            Error::Io { .. } => EXIT_RUNTIME,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Predict(a) => predict(a),
        Command::SweepAlpha(a) => run_sweep_alpha(a),
        Command::SweepSplit(a) => run_sweep_split(a),
        Command::Report(a) => report(a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn emit(output: Option<&Path>, contents: &str) -> CmdResult {
    match output {
        Some(path) => write_atomically(path, contents)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    Ok(())
}

fn load(path: &Path, sampling_count: Option<u32>, filter: bool, group: Option<&str>) -> Result<Dataset, Failure> {
    let mut data = load_dataset(path, sampling_count)?;
    if let Some(g) = group {
        data = data.restrict_to_group(g);
        if data.is_empty() {
            return Err(usage(format!("no records in group {g:?}")));
        }
    }
    if filter {
        let (kept, dropped) = filter_unanswerable(data);
        if dropped > 0 {
            eprintln!("discarded {dropped} questions with no correct sample");
        }
        data = kept;
    }
    Ok(data)
}

fn load_data(args: &DataArgs) -> Result<Dataset, Failure> {
    load(&args.input, args.sampling_count, !args.no_filter, args.group.as_deref())
}

fn calibration_scores(data: &Dataset) -> Result<CalibrationScores, Failure> {
    let scores = data.labeled().iter().map(|l| l.truth_score()).collect();
    Ok(CalibrationScores::new(scores)?)
}

fn generate(a: GenerateArgs) -> CmdResult {
    let cfg = GeneratorConfig {
        num_records: a.records,
        num_options: a.options,
        sampling_count: a.sampling_count,
        concentration: a.concentration,
        accuracy: a.accuracy,
        seed: a.seed,
    };
    let data = generate_dataset(&cfg)?;
    emit(a.output.as_deref(), &dataset_to_jsonl(&data))
}

fn calibrate(a: CalibrateArgs) -> CmdResult {
    let level = RiskLevel::new(a.alpha)?;
    let data = load_data(&a.data)?;
    let scores = calibration_scores(&data)?;
    let tau = conformal_threshold(&scores, level);
    eprintln!(
        "n = {}, rank k = {}, alpha = {level}",
        scores.len(),
        conformal_rank(scores.len(), level)
    );
    emit(None, &format!("{tau}\n"))
}

fn predict(a: PredictArgs) -> CmdResult {
    let level = RiskLevel::new(a.alpha)?;
    let cal = load(&a.calibration, a.sampling_count, !a.no_filter, None)?;
    let test = load(&a.input, a.sampling_count, false, None)?;
    let tau = conformal_threshold(&calibration_scores(&cal)?, level);
    let preds = test
        .records()
        .iter()
        .map(|r| {
            let dist = frequency_distribution(r)?;
            Ok(PredictionRecord {
                id: r.id.clone(),
                alpha: level.alpha(),
                tau,
                set: prediction_set(&dist, tau),
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    emit(a.output.as_deref(), &predictions_to_jsonl(&preds))
}

fn levels(spec: &str) -> Result<Vec<RiskLevel>, Failure> {
    Ok(parse_axis(spec)?
        .into_iter()
        .map(RiskLevel::new)
        .collect::<Result<_, _>>()?)
}

fn check_trials(trials: usize) -> CmdResult {
    if trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    Ok(())
}

fn run_sweep_alpha(a: SweepAlphaArgs) -> CmdResult {
    let alphas = levels(&a.alpha)?;
    check_trials(a.common.trials)?;
    let data = load_data(&a.common.data)?;
    let (trials, seed) = (a.common.trials, a.common.seed);
    let run = || sweep_alpha(&data, a.ratio, &alphas, trials, seed);
    let result = match a.common.workers {
        Some(w) => with_workers(w, run),
        None => run(),
    }?;
    emit(a.common.output.as_deref(), &sweep_csv(&result))
}

fn run_sweep_split(a: SweepSplitArgs) -> CmdResult {
    let ratios = parse_axis(&a.ratio)?;
    let level = RiskLevel::new(a.alpha)?;
    check_trials(a.common.trials)?;
    let data = load_data(&a.common.data)?;
    let (trials, seed) = (a.common.trials, a.common.seed);
    let run = || sweep_split(&data, &ratios, level, trials, seed);
    let result = match a.common.workers {
        Some(w) => with_workers(w, run),
        None => run(),
    }?;
    emit(a.common.output.as_deref(), &sweep_csv(&result))
}

fn report(a: ReportArgs) -> CmdResult {
    if !a.label.is_empty() && a.label.len() != a.input.len() {
        return Err(usage(format!(
            "{} labels given for {} inputs",
            a.label.len(),
            a.input.len()
        )));
    }
    let tables = a
        .input
        .iter()
        .enumerate()
        .map(|(i, path)| {
            let label = a.label.get(i).cloned().unwrap_or_else(|| {
                path.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string())
            });
            Ok((label, read_sweep_csv(path)?))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    emit(None, &render_report(&tables))
}
