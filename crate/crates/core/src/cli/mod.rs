//! The `foukit` command-line tool.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical or estimation
//! failure, 4 unstable Monte Carlo experiment.

pub mod io;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::estimate::{fit, FitConfig, FitReport, WhittleSettings};
use crate::filters::Filter;
use crate::forecast::{mae, naive_predictions, predictions_with_gammas};
use crate::model::{spectral_density, AutocovarianceGrid, FouSpec};
use crate::montecarlo::{run_experiment, table_emit, McGrid, McReport, THREADS_ENV};
use crate::path::Path;
use crate::simulate::{path_standardize, simulate_fou, SimulationPlan};
use io::{emit, read_json, read_versioned, series_csv, to_json, write_atomic, SeriesFile};

/// A failure with its process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn validation(message: String) -> Self {
        Self {
            code: 2,
            kind: "validation",
            message,
        }
    }

    pub fn estimation(message: String) -> Self {
        Self {
            code: 3,
            kind: "estimation",
            message,
        }
    }

    pub fn io(message: String) -> Self {
        Self {
            code: 2,
            kind: "io",
            message,
        }
    }

    fn invalid(e: Error) -> Self {
        Self::validation(e.to_string())
    }

    /// Numerical failure, or instability for Monte Carlo runs.
    fn numeric(e: Error) -> Self {
        match e.root() {
            Error::ExperimentUnstable { .. } => Self {
                code: 4,
                kind: "unstable",
                message: e.to_string(),
            },
            _ => {
                let stage = e.stage().map(|s| format!("stage={s} ")).unwrap_or_default();
                Self::estimation(format!("{stage}{}", e.root()))
            }
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "error[{}]: {}", self.kind, self.message.replace('\n', " "))
    }
}

#[derive(Debug, Parser)]
#[command(name = "foukit", version, about = "Simulate, fit and forecast FOU(p) processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a stationary path and write it as `time,value` CSV.
    Simulate(SimulateArgs),
    /// Estimate H, sigma and lambda from a series.
    Fit(FitArgs),
    /// One-step predictions of the last m points under a fitted model.
    Forecast(ForecastArgs),
    /// Tabulate the spectral density on a grid.
    Spectrum(SpectrumArgs),
    /// Tabulate the model autocovariance, optionally next to a sample ACF.
    Acf(AcfArgs),
    /// Run a Monte Carlo study over a (T, n) grid.
    Mc(McArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Model spec (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub n: usize,
    /// Sampling step; defaults to horizon / n when --horizon is given.
    #[arg(long, conflicts_with = "horizon")]
    pub delta: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Burn-in time (default 20 / lambda_min).
    #[arg(long)]
    pub burn_in: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Series CSV (`value` or `time,value`).
    pub series: PathBuf,
    /// `binomial:k`, `daub2` or comma-separated coefficients.
    #[arg(long, default_value = "binomial:2")]
    pub filter: Filter,
    #[arg(long, default_value_t = 1)]
    pub p: u32,
    /// Standardize the series and fix sigma = 1.
    #[arg(long)]
    pub standardize: bool,
    /// Step for single-column series.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Also compute the Whittle estimate.
    #[arg(long)]
    pub whittle: bool,
    #[arg(long, default_value_t = 0.05)]
    pub lambda_lo: f64,
    #[arg(long, default_value_t = 5.0)]
    pub lambda_hi: f64,
    #[arg(long)]
    pub freq_min: Option<f64>,
    #[arg(long)]
    pub freq_max: Option<f64>,
    #[arg(long)]
    pub n_freq: Option<usize>,
    #[arg(long, default_value_t = 1e-4)]
    pub whittle_tol: f64,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    pub series: PathBuf,
    /// Report written by `fit`.
    #[arg(long)]
    pub fit: PathBuf,
    /// Number of trailing predictions; repeat for several summaries.
    #[arg(long, required = true)]
    pub m: Vec<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Per-step CSV for the largest m.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub x_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AcfArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 50)]
    pub max_lag: usize,
    /// Series whose sample ACF is added as extra columns.
    #[arg(long)]
    pub series: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Study grid (JSON).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Parse arguments, run, print any error and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.code
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Forecast(a) => cmd_forecast(&a),
        Command::Spectrum(a) => cmd_spectrum(&a),
        Command::Acf(a) => cmd_acf(&a),
        Command::Mc(a) => cmd_mc(&a),
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let threads: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&t| t >= 1)
            .ok_or_else(|| CliError::validation(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        // a global pool may already exist when called repeatedly in-process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(())
}

fn read_spec(file: &std::path::Path) -> Result<FouSpec, CliError> {
    read_json(file)
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let spec = read_spec(&a.spec)?;
    let delta = match (a.delta, a.horizon) {
        (Some(d), None) => d,
        (None, Some(t)) => t / a.n as f64,
        (None, None) => return Err(CliError::validation("one of --delta or --horizon is required".into())),
        (Some(_), Some(_)) => unreachable!("rejected by the parser"),
    };
    let mut plan = SimulationPlan::new(spec, a.n, delta, a.seed).map_err(CliError::invalid)?;
    if let Some(b) = a.burn_in {
        plan = plan.with_burn_in(b).map_err(CliError::invalid)?;
    }
    eprintln!(
        "plan: n={} delta={} T={} burn_in={} burn_in_steps={} seed={}",
        plan.n(),
        plan.delta(),
        plan.horizon(),
        plan.burn_in(),
        plan.burn_in_steps(),
        plan.seed()
    );
    let path = simulate_fou(&plan).map_err(CliError::numeric)?;
    emit(a.out.as_deref(), &series_csv(&path))
}

pub fn cmd_fit(a: &FitArgs) -> Result<(), CliError> {
    let path = SeriesFile::read(&a.series)?.into_path(a.delta)?;
    let mut config = FitConfig::new(a.filter.clone(), a.p);
    if a.standardize {
        config = config.standardized();
    }
    if a.whittle {
        config = config.with_whittle(WhittleSettings {
            lambda_lo: a.lambda_lo,
            lambda_hi: a.lambda_hi,
            freq_min: a.freq_min,
            freq_max: a.freq_max,
            n_freq: a.n_freq,
            tol: a.whittle_tol,
        });
        config
            .whittle
            .unwrap()
            .resolve(path.horizon(), path.delta())
            .map_err(CliError::invalid)?;
    }
    config.validate().map_err(CliError::invalid)?;
    eprintln!(
        "fit: n={} delta={} filter={} p={} standardize={} whittle={}",
        path.len(),
        path.delta(),
        config.filter,
        config.p,
        config.standardize,
        config.whittle.is_some()
    );
    let report = fit(&path, &config).map_err(CliError::numeric)?;
    emit(a.out_json.as_deref(), &to_json(&report)?)
}

/// Summary written by `forecast`: `mae_<m>` and `naive_mae_<m>` per requested `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastSummary {
    pub n: usize,
    #[serde(flatten)]
    pub scores: BTreeMap<String, f64>,
}

pub fn cmd_forecast(a: &ForecastArgs) -> Result<(), CliError> {
    let report: FitReport = read_versioned(&a.fit)?;
    let spec = report
        .spec_hat
        .clone()
        .ok_or_else(|| CliError::estimation(format!("fit report has no model (H estimate {} outside (0, 1))", report.h_hat)))?;
    let series = SeriesFile::read(&a.series)?;
    let path = series.into_path(a.delta.or(Some(report.delta)))?;
    let path = if report.standardization.is_some() {
        path_standardize(&path).map_err(CliError::numeric)?
    } else {
        path
    };
    let n = path.len();
    let mut ms = a.m.clone();
    ms.sort_unstable();
    ms.dedup();
    let m_max = *ms.last().expect("clap requires --m");
    if ms[0] < 1 || m_max >= n {
        return Err(CliError::validation(format!("need 1 <= m < n = {n}, got m = {ms:?}")));
    }
    eprintln!("forecast: n={n} delta={} m={ms:?}", path.delta());
    let grid = AutocovarianceGrid::new(&spec, path.delta(), n - 1).map_err(CliError::numeric)?;
    let predicted = predictions_with_gammas(grid.values(), &path, m_max).map_err(CliError::numeric)?;
    let naive = naive_predictions(&path, m_max).map_err(CliError::numeric)?;
    let raw = |z: f64| path.standardization().map_or(z, |s| s.to_raw(z));
    let actual: Vec<f64> = path.values()[n - m_max..].iter().map(|&z| raw(z)).collect();

    let mut summary = ForecastSummary {
        n,
        scores: BTreeMap::new(),
    };
    for &m in &ms {
        let tail = m_max - m..m_max;
        let e = mae(&actual[tail.clone()], &predicted[tail.clone()]).map_err(CliError::numeric)?;
        let e_naive = mae(&actual[tail.clone()], &naive[tail]).map_err(CliError::numeric)?;
        summary.scores.insert(format!("mae_{m}"), e);
        summary.scores.insert(format!("naive_mae_{m}"), e_naive);
    }

    let mut csv = String::from("index,actual,predicted,abs_error\n");
    for (i, (y, yhat)) in actual.iter().zip(&predicted).enumerate() {
        let _ = writeln!(csv, "{},{},{},{}", n - m_max + i + 1, y, yhat, (y - yhat).abs());
    }
    match &a.out {
        Some(file) => write_atomic(file, csv.as_bytes())?,
        None => print!("{csv}"),
    }
    let json = to_json(&summary)?;
    match &a.summary {
        Some(file) => write_atomic(file, &json),
        None => {
            eprint!("{}", String::from_utf8_lossy(&json));
            Ok(())
        }
    }
}

pub fn cmd_spectrum(a: &SpectrumArgs) -> Result<(), CliError> {
    let spec = read_spec(&a.spec)?;
    if !(a.x_min < a.x_max) || a.points < 2 {
        return Err(CliError::validation("need x_min < x_max and at least 2 points".into()));
    }
    let step = (a.x_max - a.x_min) / (a.points - 1) as f64;
    let mut csv = String::from("x,density\n");
    for i in 0..a.points {
        let x = if i + 1 == a.points { a.x_max } else { a.x_min + i as f64 * step };
        let f = spectral_density(&spec, x).map_err(CliError::invalid)?;
        let _ = writeln!(csv, "{x},{f}");
    }
    emit(a.out.as_deref(), csv.as_bytes())
}

/// Sample autocovariances `(1/n) Σ (x_t − x̄)(x_{t+k} − x̄)` for `k = 0..=max_lag`.
pub fn sample_autocovariance(xs: &[f64], max_lag: usize) -> Vec<f64> {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    (0..=max_lag)
        .map(|k| {
            if k >= n {
                return f64::NAN;
            }
            xs.iter()
                .zip(&xs[k..])
                .map(|(a, b)| (a - mean) * (b - mean))
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

pub fn cmd_acf(a: &AcfArgs) -> Result<(), CliError> {
    let spec = read_spec(&a.spec)?;
    let sample = match &a.series {
        Some(file) => {
            let path: Path = SeriesFile::read(file)?.into_path(Some(a.delta))?;
            if (path.delta() - a.delta).abs() > io::SPACING_TOLERANCE * a.delta {
                return Err(CliError::validation(format!(
                    "series spacing {} differs from --delta {}",
                    path.delta(),
                    a.delta
                )));
            }
            Some(sample_autocovariance(path.values(), a.max_lag))
        }
        None => None,
    };
    let grid = AutocovarianceGrid::new(&spec, a.delta, a.max_lag).map_err(|e| match e.root() {
        Error::InvalidParameter(_) => CliError::invalid(e),
        _ => CliError::numeric(e),
    })?;
    let g = grid.values();
    let mut csv = String::from("lag,tau,model_acov,model_acf");
    if sample.is_some() {
        csv.push_str(",sample_acov,sample_acf");
    }
    csv.push('\n');
    for (k, gk) in g.iter().enumerate() {
        let _ = write!(csv, "{k},{},{gk},{}", k as f64 * a.delta, gk / g[0]);
        if let Some(s) = &sample {
            let _ = write!(csv, ",{},{}", s[k], s[k] / s[0]);
        }
        csv.push('\n');
    }
    emit(a.out.as_deref(), csv.as_bytes())
}

/// Combined JSON written by `mc`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McOutput {
    pub config: McGrid,
    pub cells: Vec<McReport>,
}

pub fn cmd_mc(a: &McArgs) -> Result<(), CliError> {
    let grid: McGrid = read_json(&a.config)?;
    let cells = grid.cells().map_err(CliError::invalid)?;
    eprintln!(
        "mc: {} cells x {} replications, estimators {:?}, master_seed {}",
        cells.len(),
        grid.replications,
        grid.estimators,
        grid.master_seed
    );
    let mut reports = Vec::with_capacity(cells.len());
    for cell in &cells {
        eprintln!("mc: T={} n={}", cell.horizon, cell.n);
        reports.push(run_experiment(cell).map_err(CliError::numeric)?);
    }
    let tables = table_emit(&reports).map_err(CliError::numeric)?;
    std::fs::create_dir_all(&a.out_dir)
        .map_err(|e| CliError::io(format!("{}: {e}", a.out_dir.display())))?;
    let out = |name: &str| a.out_dir.join(name);
    write_atomic(&out("estimates.csv"), tables.estimates_csv.as_bytes())?;
    write_atomic(&out("estimates.txt"), tables.estimates_text.as_bytes())?;
    write_atomic(&out("pvalues.csv"), tables.pvalues_csv.as_bytes())?;
    write_atomic(&out("pvalues.txt"), tables.pvalues_text.as_bytes())?;
    let combined = McOutput {
        config: grid,
        cells: reports,
    };
    write_atomic(&out("report.json"), &to_json(&combined)?)?;
    eprint!("{}", tables.estimates_text);
    Ok(())
}
