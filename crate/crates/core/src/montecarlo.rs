//! Replicated simulate-then-fit experiments and their summary tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{ensure, Error, Result};
use crate::estimate::{fit, FitConfig, WhittleSettings};
use crate::filters::{binomial_filter, Filter};
use crate::model::FouSpec;
use crate::rng;
use crate::simulate::{simulate_fou, SimulationPlan};

/// Share of failed replications above which an experiment is rejected.
pub const MAX_FAILURE_RATE: f64 = 0.05;

/// Default number of bootstrap draws for the normality test.
pub const DEFAULT_BOOTSTRAP: usize = 999;

/// Environment variable capping the worker threads of parallel sections.
pub const THREADS_ENV: &str = "FOUKIT_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Plugin,
    Whittle,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Plugin => "plugin",
            Estimator::Whittle => "whittle",
        }
    }
}

fn default_estimators() -> Vec<Estimator> {
    vec![Estimator::Plugin]
}

fn default_filter() -> Filter {
    binomial_filter(2)
}

fn default_bootstrap() -> usize {
    DEFAULT_BOOTSTRAP
}

/// One cell of a study: true model, sampling design and estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub spec: FouSpec,
    pub horizon: f64,
    pub n: usize,
    pub replications: usize,
    #[serde(default = "default_filter")]
    pub filter: Filter,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<Estimator>,
    pub master_seed: u64,
    #[serde(default)]
    pub assume_unit_sigma: bool,
    #[serde(default)]
    pub whittle: WhittleSettings,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    /// Burn-in time; `20 / λ_min` when absent.
    #[serde(default)]
    pub burn_in: Option<f64>,
}

impl McConfig {
    pub fn new(spec: FouSpec, horizon: f64, n: usize, replications: usize, master_seed: u64) -> Self {
        Self {
            spec,
            horizon,
            n,
            replications,
            filter: default_filter(),
            estimators: default_estimators(),
            master_seed,
            assume_unit_sigma: false,
            whittle: WhittleSettings::default(),
            bootstrap: DEFAULT_BOOTSTRAP,
            burn_in: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.replications >= 2, || {
            format!("replications must be >= 2, got {}", self.replications)
        })?;
        ensure(self.horizon.is_finite() && self.horizon > 0.0, || {
            format!("horizon must be positive, got {}", self.horizon)
        })?;
        ensure(self.n >= 2, || format!("n must be >= 2, got {}", self.n))?;
        ensure(!self.estimators.is_empty(), || "no estimators selected".into())?;
        ensure(self.spec.distinct_rates() == 1, || "experiments need a single rate".into())?;
        ensure(self.filter.order() >= 2, || "filter order must be >= 2".into())?;
        ensure(self.bootstrap >= 999, || format!("bootstrap must be >= 999, got {}", self.bootstrap))?;
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        self.horizon / self.n as f64
    }

    pub fn true_lambda(&self) -> f64 {
        self.spec.lambda_min()
    }

    fn fit_config(&self) -> FitConfig {
        let mut cfg = FitConfig::new(self.filter.clone(), self.spec.order());
        cfg.assume_unit_sigma = self.assume_unit_sigma;
        if self.estimators.contains(&Estimator::Whittle) {
            cfg.whittle = Some(self.whittle);
        }
        cfg
    }
}

/// Table columns for one estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub mean: f64,
    /// `|mean − λ⁰|`.
    pub mean_abs_error: f64,
    pub sd: f64,
    /// Absent with fewer than 20 estimates.
    pub normality_pvalue: Option<f64>,
    pub raw_estimates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub true_lambda: f64,
    pub horizon: f64,
    pub n: usize,
    pub replications: usize,
    pub failures: usize,
    /// Replications whose `Ĥ` fell outside `(0, 1)`; still aggregated.
    pub h_out_of_range: usize,
    pub estimators: BTreeMap<Estimator, EstimatorSummary>,
}

struct Replication {
    plugin: f64,
    whittle: Option<f64>,
    h_in_range: bool,
}

fn replicate(cfg: &McConfig, fit_cfg: &FitConfig, index: usize) -> Result<Replication> {
    let seed = rng::replication_seed(cfg.master_seed, index as u64);
    let mut plan = SimulationPlan::new(cfg.spec.clone(), cfg.n, cfg.delta(), seed)?;
    if let Some(b) = cfg.burn_in {
        plan = plan.with_burn_in(b)?;
    }
    let path = simulate_fou(&plan)?;
    let report = fit(&path, fit_cfg)?;
    if fit_cfg.whittle.is_some() && report.lambda_whittle.is_none() {
        return Err(Error::InvalidParameter("Whittle skipped: H estimate out of range".into()));
    }
    Ok(Replication {
        plugin: report.lambda_plugin,
        whittle: report.lambda_whittle,
        h_in_range: report.h_in_range,
    })
}

/// Build a rayon pool honouring [`THREADS_ENV`].
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let threads: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&t| t >= 1)
            .ok_or_else(|| Error::InvalidParameter(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        builder = builder.num_threads(threads);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start thread pool: {e}")))
}

/// Run all replications in parallel and aggregate them.
///
/// Replication `r` simulates with seed `replication_seed(master_seed, r)`, so
/// results do not depend on scheduling. Failed replications are dropped and
/// counted; more than 5% failures is an error.
pub fn run_experiment(cfg: &McConfig) -> Result<McReport> {
    cfg.validate()?;
    let fit_cfg = cfg.fit_config();
    let outcomes: Vec<Result<Replication>> = thread_pool()?.install(|| {
        (0..cfg.replications)
            .into_par_iter()
            .map(|r| replicate(cfg, &fit_cfg, r))
            .collect()
    });
    let total = outcomes.len();
    let successes: Vec<Replication> = outcomes.into_iter().filter_map(|o| o.ok()).collect();
    let failures = total - successes.len();
    if failures as f64 > MAX_FAILURE_RATE * total as f64 || successes.len() < 2 {
        return Err(Error::ExperimentUnstable { failed: failures, total });
    }

    let lambda0 = cfg.true_lambda();
    let mut estimators = BTreeMap::new();
    for (k, &est) in cfg.estimators.iter().enumerate() {
        let raw: Vec<f64> = successes
            .iter()
            .map(|s| match est {
                Estimator::Plugin => s.plugin,
                Estimator::Whittle => s.whittle.expect("checked in replicate"),
            })
            .collect();
        let (mean, sd) = mean_sd(&raw);
        let normality_pvalue = if raw.len() >= 20 {
            let seed = rng::replication_seed(rng::splitmix64(cfg.master_seed), k as u64);
            Some(cvm_normality_pvalue(&raw, cfg.bootstrap, seed)?)
        } else {
            None
        };
        estimators.insert(
            est,
            EstimatorSummary {
                mean,
                mean_abs_error: (mean - lambda0).abs(),
                sd,
                normality_pvalue,
                raw_estimates: raw,
            },
        );
    }
    Ok(McReport {
        true_lambda: lambda0,
        horizon: cfg.horizon,
        n: cfg.n,
        replications: cfg.replications,
        failures,
        h_out_of_range: successes.iter().filter(|s| !s.h_in_range).count(),
        estimators,
    })
}

/// Mean and sample standard deviation (divisor `m − 1`), summed in sorted
/// order so the result does not depend on the input order.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    if sorted.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = sorted.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Cramér–von Mises statistic of `xs` against a normal law with the sample
/// mean and standard deviation. Infinite for a constant sample.
pub fn cvm_statistic(xs: &[f64]) -> f64 {
    let (mean, sd) = mean_sd(xs);
    if !(sd > 0.0) {
        return f64::INFINITY;
    }
    let mut z: Vec<f64> = xs.iter().map(|x| (x - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    let sum: f64 = z
        .iter()
        .enumerate()
        .map(|(i, &zi)| {
            let d = standard_normal_cdf(zi) - (2 * i + 1) as f64 / (2.0 * n);
            d * d
        })
        .sum();
    1.0 / (12.0 * n) + sum
}

/// Parametric-bootstrap p-value of the composite normality hypothesis.
///
/// The null law of [`cvm_statistic`] is approximated by `bootstrap` samples
/// of the same size drawn from a standard normal (the statistic is location
/// and scale free). Returns `(1 + #{T* ≥ T}) / (B + 1)`.
pub fn cvm_normality_pvalue(samples: &[f64], bootstrap: usize, seed: u64) -> Result<f64> {
    if samples.len() < 20 {
        return Err(Error::TooFewSamples {
            needed: 20,
            got: samples.len(),
        });
    }
    ensure(bootstrap >= 999, || format!("bootstrap must be >= 999, got {bootstrap}"))?;
    ensure(samples.iter().all(|x| x.is_finite()), || "samples must be finite".into())?;
    let observed = cvm_statistic(samples);
    let n = samples.len();
    let exceed: usize = (0..bootstrap)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::from_seed(rng::replication_seed(seed, b as u64));
            let draw: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            usize::from(cvm_statistic(&draw) >= observed)
        })
        .sum();
    Ok((1 + exceed) as f64 / (bootstrap + 1) as f64)
}

/// Grid of cells sharing everything but `(T, n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McGrid {
    pub spec: FouSpec,
    pub horizons: Vec<f64>,
    pub sizes: Vec<usize>,
    pub replications: usize,
    #[serde(default = "default_filter")]
    pub filter: Filter,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<Estimator>,
    pub master_seed: u64,
    #[serde(default)]
    pub assume_unit_sigma: bool,
    #[serde(default)]
    pub whittle: WhittleSettings,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    #[serde(default)]
    pub burn_in: Option<f64>,
}

impl McGrid {
    /// Cells in table order: `T` descending, then `n` ascending. Every cell
    /// uses the grid's master seed.
    pub fn cells(&self) -> Result<Vec<McConfig>> {
        ensure(!self.horizons.is_empty() && !self.sizes.is_empty(), || {
            "grid needs at least one horizon and one size".into()
        })?;
        let mut horizons = self.horizons.clone();
        horizons.sort_by(|a, b| b.total_cmp(a));
        let mut sizes = self.sizes.clone();
        sizes.sort_unstable();
        let mut cells = Vec::new();
        for &horizon in &horizons {
            for &n in &sizes {
                let cell = McConfig {
                    spec: self.spec.clone(),
                    horizon,
                    n,
                    replications: self.replications,
                    filter: self.filter.clone(),
                    estimators: self.estimators.clone(),
                    master_seed: self.master_seed,
                    assume_unit_sigma: self.assume_unit_sigma,
                    whittle: self.whittle,
                    bootstrap: self.bootstrap,
                    burn_in: self.burn_in,
                };
                cell.validate()?;
                cells.push(cell);
            }
        }
        Ok(cells)
    }
}

/// CSV and aligned-text renderings of a study.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tables {
    pub estimates_csv: String,
    pub estimates_text: String,
    pub pvalues_csv: String,
    pub pvalues_text: String,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.4}"))
}

/// Render reports as the estimate table (`T, n`, then mean, `|mean − λ⁰|`
/// and sd per estimator) and the normality p-value table. Rows are ordered
/// by `T` descending, then `n` ascending.
pub fn table_emit(reports: &[McReport]) -> Result<Tables> {
    ensure(!reports.is_empty(), || "no reports to tabulate".into())?;
    let mut rows: Vec<&McReport> = reports.iter().collect();
    rows.sort_by(|a, b| b.horizon.total_cmp(&a.horizon).then(a.n.cmp(&b.n)));
    let mut estimators: Vec<Estimator> = rows.iter().flat_map(|r| r.estimators.keys().copied()).collect();
    estimators.sort();
    estimators.dedup();

    let mut head = vec!["T".to_string(), "n".to_string()];
    let mut p_head = head.clone();
    for e in &estimators {
        head.extend([format!("{}_mean", e.name()), format!("{}_abs_error", e.name()), format!("{}_sd", e.name())]);
        p_head.push(format!("{}_pvalue", e.name()));
    }
    let mut body = Vec::new();
    let mut p_body = Vec::new();
    for r in &rows {
        let mut row = vec![r.horizon.to_string(), r.n.to_string()];
        let mut p_row = row.clone();
        for e in &estimators {
            match r.estimators.get(e) {
                Some(s) => {
                    row.extend([format!("{:.4}", s.mean), format!("{:.4}", s.mean_abs_error), format!("{:.4}", s.sd)]);
                    p_row.push(fmt_opt(s.normality_pvalue));
                }
                None => {
                    row.extend(["NA".to_string(), "NA".to_string(), "NA".to_string()]);
                    p_row.push("NA".to_string());
                }
            }
        }
        body.push(row);
        p_body.push(p_row);
    }
    Ok(Tables {
        estimates_csv: to_csv(&head, &body)?,
        estimates_text: to_text(&head, &body),
        pvalues_csv: to_csv(&p_head, &p_body)?,
        pvalues_text: to_text(&p_head, &p_body),
    })
}

fn to_csv(head: &[String], body: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
    w.write_record(head).map_err(io)?;
    for row in body {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn to_text(head: &[String], body: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..head.len())
        .map(|c| body.iter().map(|r| r[c].len()).chain([head[c].len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in std::iter::once(head).chain(body.iter().map(Vec::as_slice)) {
        let cells: Vec<String> = row.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_sd_is_order_free() {
        let xs = [0.1, 1e16, -1e16, 0.3, 2.0];
        let mut ys = xs;
        ys.reverse();
        assert_eq!(mean_sd(&xs), mean_sd(&ys));
        assert_eq!(mean_sd(&[1.0, 3.0]), (2.0, std::f64::consts::SQRT_2));
    }

    #[test]
    fn constant_sample_is_maximally_non_normal() {
        let p = cvm_normality_pvalue(&[0.8; 30], 999, 1).unwrap();
        assert_eq!(p, 1.0 / 1000.0);
        assert!(matches!(
            cvm_normality_pvalue(&[0.1; 10], 999, 1),
            Err(Error::TooFewSamples { needed: 20, got: 10 })
        ));
    }

    #[test]
    fn cvm_statistic_matches_direct_formula() {
        let xs: Vec<f64> = (0..25).map(|i| ((i * 37) % 25) as f64 / 5.0).collect();
        let stat = cvm_statistic(&xs);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let mut u: Vec<f64> = xs
            .iter()
            .map(|x| statrs::distribution::ContinuousCDF::cdf(&statrs::distribution::Normal::new(mean, sd).unwrap(), *x))
            .collect();
        u.sort_by(f64::total_cmp);
        let direct = 1.0 / (12.0 * n)
            + u.iter()
                .enumerate()
                .map(|(i, ui)| (ui - (2.0 * i as f64 + 1.0) / (2.0 * n)).powi(2))
                .sum::<f64>();
        assert!((stat - direct).abs() < 1e-12);
    }

    #[test]
    fn grid_orders_cells() {
        let spec = FouSpec::single(0.8, 2, 1.0, 0.7).unwrap();
        let grid = McGrid {
            spec,
            horizons: vec![10.0, 100.0, 50.0],
            sizes: vec![5000, 1000, 10000],
            replications: 10,
            filter: binomial_filter(2),
            estimators: vec![Estimator::Plugin],
            master_seed: 1,
            assume_unit_sigma: false,
            whittle: WhittleSettings::default(),
            bootstrap: 999,
            burn_in: None,
        };
        let cells = grid.cells().unwrap();
        let order: Vec<(f64, usize)> = cells.iter().map(|c| (c.horizon, c.n)).collect();
        assert_eq!(order[0], (100.0, 1000));
        assert_eq!(order[2], (100.0, 10000));
        assert_eq!(order[8], (10.0, 10000));
    }
}
