//! Batch command-line front end.
//!
//! Exit codes: 0 success (or no anomaly), 1 usage error, 2 data error,
//! 10 flood, 11 drought.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::anomaly::{self, AnomalyConfig, AnomalyKind};
use crate::error::Error;
use crate::evaluation;
use crate::ingest::{load_daily_series, split_by_years, write_daily_series, DailySeries};
use crate::metrics::{descriptive_stats, SeriesStats};
use crate::nn::{load_checkpoint, save_checkpoint, CandidateActivation, NetworkConfig, OptimizerKind, TrainConfig};
use crate::pipeline::{train_on_series, PipelineConfig, ScalerFit};
use crate::plot::{emit_plot, PlotSeries};
use crate::reservoir::{self, ReservoirAccount, RuleCurve};
use crate::rng::{DEFAULT_GENERATION_SEED, DEFAULT_INIT_SEED};
use crate::thomas_fiering::{self, PeriodParams, Resolution};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_FLOOD: i32 = 10;
pub const EXIT_DROUGHT: i32 = 11;

#[derive(Debug, Parser)]
#[command(name = "inflow", version, about = "Daily reservoir inflow forecasting toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Descriptive statistics and lag 1-3 autocorrelation per split.
    Stats(StatsArgs),
    /// Train the stacked LSTM and write a checkpoint plus training report.
    Train(TrainArgs),
    /// Score the LSTM against Thomas-Fiering and 10-daily baselines.
    Evaluate(EvaluateArgs),
    /// Recursive multi-day forecast from the end of a series.
    Forecast(ForecastArgs),
    /// Generate synthetic inflow with the Thomas-Fiering model.
    Generate(GenerateArgs),
    /// Flag the last k days as flood, drought or normal.
    Anomaly(AnomalyArgs),
    /// Reservoir factor, release policy and rule-curve check.
    Reservoir(ReservoirArgs),
    /// Plot one or more daily CSV series to SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long, default_value_t = 12)]
    pub train_years: u32,
    #[arg(long, default_value_t = 1)]
    pub validation_years: u32,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// JSON destination; printed after the table when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub split: SplitArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CandidateArg {
    Tanh,
    Sigmoid,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OptimizerArg {
    Adam,
    Sgd,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Checkpoint destination.
    #[arg(long)]
    pub output: PathBuf,
    /// Training report destination (default: `<output>.report.json`).
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    pub lookback: u32,
    #[arg(long, default_value_t = 15, value_parser = clap::value_parser!(u32).range(1..))]
    pub batch: u32,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
    pub epochs: u32,
    #[arg(long, default_value_t = DEFAULT_INIT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub learning_rate: f64,
    #[arg(long, value_enum, default_value = "adam")]
    pub optimizer: OptimizerArg,
    /// Hidden sizes of the stacked layers, bottom first.
    #[arg(long, value_delimiter = ',', default_value = "4,4")]
    pub hidden: Vec<usize>,
    #[arg(long, value_enum, default_value = "tanh")]
    pub candidate: CandidateArg,
    #[arg(long, value_enum, default_value = "train")]
    pub scaler_fit: ScalerFit,
    #[command(flatten)]
    pub split: SplitArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// First day of the evaluation window (default: last `--days` days).
    #[arg(long)]
    pub eval_start: Option<NaiveDate>,
    #[arg(long, default_value_t = 365)]
    pub days: usize,
    #[arg(long, default_value_t = DEFAULT_GENERATION_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Observed vs LSTM forecast over the window, as SVG.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 7)]
    pub days: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ResolutionArg {
    Monthly,
    Daily,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Daily CSV to fit parameters from.
    #[arg(long, conflicts_with = "params", required_unless_present = "params")]
    pub input: Option<PathBuf>,
    /// Previously fitted parameters (JSON).
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub years: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "monthly")]
    pub resolution: ResolutionArg,
    #[arg(long, default_value_t = 2000)]
    pub start_year: i32,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write the fitted parameters as JSON.
    #[arg(long)]
    pub params_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnomalyArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = anomaly::DEFAULT_K)]
    pub k: usize,
    #[arg(long, default_value_t = anomaly::DEFAULT_RHO)]
    pub rho: f64,
    #[arg(long, default_value_t = anomaly::DEFAULT_TAU)]
    pub tau: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReservoirArgs {
    #[arg(long)]
    pub storage: f64,
    /// Total inflow expected over the rest of the period.
    #[arg(long)]
    pub inflow: f64,
    /// Total indent (demand) over the rest of the period.
    #[arg(long)]
    pub indent: f64,
    /// Days left in the period, for a volume-per-day release figure.
    #[arg(long)]
    pub remaining_days: Option<u32>,
    /// Forecast inflow for the day being released.
    #[arg(long)]
    pub predicted_inflow: Option<f64>,
    #[arg(long, requires = "elevation")]
    pub date: Option<NaiveDate>,
    #[arg(long, requires = "date")]
    pub elevation: Option<f64>,
    /// Rule curve JSON (default: built-in Bhakra filling rules).
    #[arg(long)]
    pub rule_curve: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// One label per input (defaults to file stems).
    #[arg(long, num_args = 1..)]
    pub label: Vec<String>,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value = "Daily inflow")]
    pub title: String,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.into())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses arguments, runs the command, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

pub fn execute(command: Command) -> CliResult<i32> {
    match command {
        Command::Stats(a) => cmd_stats(a),
        Command::Train(a) => cmd_train(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Forecast(a) => cmd_forecast(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Anomaly(a) => cmd_anomaly(a),
        Command::Reservoir(a) => cmd_reservoir(a),
        Command::Plot(a) => cmd_plot(a),
    }
}

fn read_series(path: &Path) -> CliResult<DailySeries> {
    let file = File::open(path)?;
    Ok(load_daily_series(BufReader::new(file))?)
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

#[derive(Debug, Serialize, serde::Deserialize)]
pub struct StatsReport {
    pub train: SeriesStats,
    pub validation: SeriesStats,
    pub test: SeriesStats,
}

fn cmd_stats(a: StatsArgs) -> CliResult<i32> {
    let series = read_series(&a.input)?;
    let split = split_by_years(&series, a.split.train_years, a.split.validation_years)?;
    let v = series.values();
    let report = StatsReport {
        train: descriptive_stats(&v[split.train.clone()])?,
        validation: descriptive_stats(&v[split.validation.clone()])?,
        test: descriptive_stats(&v[split.test.clone()])?,
    };
    let mut out = std::io::stdout();
    writeln!(out, "{:<12}{:>14}{:>14}{:>14}", "", "train", "validation", "test")?;
    let rows: [(&str, fn(&SeriesStats) -> f64); 10] = [
        ("days", |s| s.n as f64),
        ("min", |s| s.min),
        ("max", |s| s.max),
        ("mean", |s| s.mean),
        ("std_dev", |s| s.std_dev),
        ("kurtosis", |s| s.kurtosis),
        ("skewness", |s| s.skewness),
        ("r1", |s| s.r1),
        ("r2", |s| s.r2),
        ("r3", |s| s.r3),
    ];
    for (name, f) in rows {
        writeln!(
            out,
            "{name:<12}{:>14.3}{:>14.3}{:>14.3}",
            f(&report.train),
            f(&report.validation),
            f(&report.test)
        )?;
    }
    write_output(a.output.as_deref(), &to_json(&report)?)?;
    Ok(EXIT_OK)
}

fn cmd_train(a: TrainArgs) -> CliResult<i32> {
    let series = read_series(&a.input)?;
    let cfg = PipelineConfig {
        network: NetworkConfig {
            lookback: a.lookback as usize,
            hidden_sizes: a.hidden.clone(),
            batch_size: a.batch as usize,
            candidate_activation: match a.candidate {
                CandidateArg::Tanh => CandidateActivation::Tanh,
                CandidateArg::Sigmoid => CandidateActivation::Sigmoid,
            },
        },
        train: TrainConfig {
            epochs: a.epochs as usize,
            learning_rate: a.learning_rate,
            optimizer: match a.optimizer {
                OptimizerArg::Adam => OptimizerKind::Adam,
                OptimizerArg::Sgd => OptimizerKind::Sgd,
            },
            seed: a.seed,
            ..TrainConfig::default()
        },
        scaler_fit: a.scaler_fit,
        train_years: a.split.train_years,
        validation_years: a.split.validation_years,
    };
    cfg.network.validate().map_err(usage)?;
    cfg.train.validate().map_err(usage)?;
    let model = train_on_series(&series, &cfg)?;
    std::fs::write(&a.output, save_checkpoint(&model.net, &model.scaler)?)?;
    let report_path = a.report.clone().unwrap_or_else(|| {
        let mut p = a.output.clone().into_os_string();
        p.push(".report.json");
        PathBuf::from(p)
    });
    std::fs::write(&report_path, to_json(&model.report)?)?;
    if let Some(last) = model.report.test.last() {
        eprintln!(
            "epoch {}: train rmse {:.4}, test rmse {:.4} r2 {:.4}",
            last.epoch, last.train.rmse, last.test.rmse, last.test.r_squared
        );
    }
    Ok(EXIT_OK)
}

fn cmd_evaluate(a: EvaluateArgs) -> CliResult<i32> {
    let (net, scaler) = load_checkpoint(&std::fs::read(&a.checkpoint)?)?;
    let series = read_series(&a.input)?;
    let range = evaluation::eval_range(&series, a.eval_start, a.days)?;
    let cmp = evaluation::compare(&net, &scaler, &series, range.clone(), a.seed)?;
    if let Some(path) = &a.plot {
        let normalized: Vec<f64> = series.values().iter().map(|&v| scaler.normalize(v)).collect();
        let (pred, obs) = evaluation::lstm_one_step(&net, &normalized, range)?;
        emit_plot(
            "Observed vs LSTM one-day-ahead forecast (normalized)",
            &[PlotSeries::new("observed", obs), PlotSeries::new("lstm", pred)],
            path,
        )?;
    }
    write_output(a.output.as_deref(), &to_json(&cmp)?)?;
    Ok(EXIT_OK)
}

fn cmd_forecast(a: ForecastArgs) -> CliResult<i32> {
    let (net, scaler) = load_checkpoint(&std::fs::read(&a.checkpoint)?)?;
    let series = read_series(&a.input)?;
    let lookback = net.config.lookback;
    if series.len() < lookback {
        return Err(Error::TooShort(format!("forecast needs {lookback} days of history")).into());
    }
    if a.days == 0 {
        return Err(CliError::Usage("--days must be at least 1".into()));
    }
    let seed: Vec<f64> = series.values()[series.len() - lookback..]
        .iter()
        .map(|&v| scaler.normalize(v))
        .collect();
    let forecast: Vec<f64> = net
        .rollout(&seed, a.days)?
        .into_iter()
        .map(|v| scaler.denormalize(v).max(0.0))
        .collect();
    let start = series.end_date() + chrono::Days::new(1);
    let out = DailySeries::new(start, forecast)?;
    let mut bytes = Vec::new();
    write_daily_series(&out, None, &mut bytes)?;
    write_output(a.output.as_deref(), &bytes)?;
    Ok(EXIT_OK)
}

fn cmd_generate(a: GenerateArgs) -> CliResult<i32> {
    let seed = a.seed.unwrap_or(DEFAULT_GENERATION_SEED);
    let params: PeriodParams = match (&a.params, &a.input) {
        (Some(p), _) => {
            let params: PeriodParams = serde_json::from_reader(BufReader::new(File::open(p)?))?;
            params.validate()?;
            params
        }
        (None, Some(input)) => {
            let series = read_series(input)?;
            match a.resolution {
                ResolutionArg::Monthly => thomas_fiering::fit_monthly(&series)?,
                ResolutionArg::Daily => thomas_fiering::fit_daily(&series)?,
            }
        }
        (None, None) => return Err(CliError::Usage("one of --input or --params is required".into())),
    };
    if let Some(p) = &a.params_out {
        std::fs::write(p, to_json(&params)?)?;
    }
    let synthetic = match a.resolution {
        ResolutionArg::Monthly => thomas_fiering::generate_monthly_from(&params, a.start_year, a.years, seed)?,
        ResolutionArg::Daily => thomas_fiering::generate_daily(&params, a.start_year, a.years, seed)?,
    };
    let resolution = match synthetic.resolution {
        Resolution::Monthly => "monthly",
        Resolution::Daily => "daily",
    };
    let comment = format!("thomas-fiering {resolution} synthetic inflow, seed={seed}, years={}", a.years);
    let mut bytes = Vec::new();
    if a.years == 0 {
        writeln!(bytes, "# {comment}")?;
        writeln!(bytes, "date,inflow")?;
    } else {
        write_daily_series(&synthetic.to_daily_series()?, Some(&comment), &mut bytes)?;
    }
    write_output(a.output.as_deref(), &bytes)?;
    Ok(EXIT_OK)
}

fn cmd_anomaly(a: AnomalyArgs) -> CliResult<i32> {
    let (net, scaler) = load_checkpoint(&std::fs::read(&a.checkpoint)?)?;
    let cfg = AnomalyConfig {
        k: a.k,
        lookback: net.config.lookback,
        rho: a.rho,
        tau: a.tau,
    };
    cfg.validate().map_err(usage)?;
    let series = read_series(&a.input)?;
    let verdict = anomaly::detect(&net, &series, &cfg, &scaler)?;
    write_output(a.output.as_deref(), &to_json(&verdict)?)?;
    Ok(match verdict.kind {
        AnomalyKind::None => EXIT_OK,
        AnomalyKind::Flood => EXIT_FLOOD,
        AnomalyKind::Drought => EXIT_DROUGHT,
    })
}

#[derive(Debug, Serialize)]
struct ReservoirReport {
    factor: f64,
    effective: bool,
    daily_release_from_storage: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    daily_release_per_day: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    total_daily_release: Option<f64>,
    violations: Vec<reservoir::Violation>,
}

fn cmd_reservoir(a: ReservoirArgs) -> CliResult<i32> {
    let account = ReservoirAccount {
        available_storage: a.storage,
        total_inflow_remaining: a.inflow,
        total_indent_remaining: a.indent,
    };
    let factor = reservoir::reservoir_factor(&account)?;
    let literal = reservoir::daily_release_from_storage(a.storage, a.indent)?;
    let per_day = a
        .remaining_days
        .map(|d| reservoir::daily_release_per_day(a.storage, d))
        .transpose()?;
    let total = match a.predicted_inflow {
        Some(q) => Some(reservoir::total_daily_release(per_day.unwrap_or(literal), q)?),
        None => None,
    };
    let curve = match &a.rule_curve {
        Some(p) => RuleCurve::from_json(BufReader::new(File::open(p)?))?,
        None => RuleCurve::default(),
    };
    let violations = match (a.date, a.elevation) {
        (Some(d), Some(e)) => reservoir::check_rule_curve(d, e, &curve),
        _ => Vec::new(),
    };
    let report = ReservoirReport {
        factor: factor.factor,
        effective: factor.effective,
        daily_release_from_storage: literal,
        daily_release_per_day: per_day,
        total_daily_release: total,
        violations,
    };
    write_output(a.output.as_deref(), &to_json(&report)?)?;
    Ok(EXIT_OK)
}

fn cmd_plot(a: PlotArgs) -> CliResult<i32> {
    if !a.label.is_empty() && a.label.len() != a.input.len() {
        return Err(CliError::Usage(format!(
            "{} labels given for {} inputs",
            a.label.len(),
            a.input.len()
        )));
    }
    let mut series = Vec::with_capacity(a.input.len());
    for (k, path) in a.input.iter().enumerate() {
        let s = read_series(path)?;
        let label = a.label.get(k).cloned().unwrap_or_else(|| {
            path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
        });
        series.push((s.start_date(), label, s.into_values()));
    }
    // align on the earliest start date
    let origin = series.iter().map(|(d, _, _)| *d).min().unwrap();
    let plots: Vec<PlotSeries> = series
        .into_iter()
        .map(|(d, label, values)| PlotSeries::new(label, values).with_offset((d - origin).num_days() as usize))
        .collect();
    emit_plot(&a.title, &plots, &a.output)?;
    Ok(EXIT_OK)
}
