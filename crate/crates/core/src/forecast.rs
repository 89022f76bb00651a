//! One-step-ahead best linear prediction under a fitted model.

use crate::error::{ensure, Error, Result};
use crate::model::{AutocovarianceGrid, FouSpec};
use crate::path::Path;

/// Innovation variances at or below this fraction of `γ(0)` are treated as
/// singular.
pub const INNOVATION_TOLERANCE: f64 = 1e-13;

/// Levinson recursion over the Toeplitz system of an autocovariance sequence.
///
/// After `k` steps, [`coefficients`](Self::coefficients) holds `φ_{k,1..k}`,
/// the weights of `x_k, x_{k-1}, …, x_1` in the best linear predictor of
/// `x_{k+1}`.
#[derive(Debug, Clone)]
pub struct DurbinLevinson<'a> {
    gammas: &'a [f64],
    phi: Vec<f64>,
    scratch: Vec<f64>,
    variance: f64,
}

impl<'a> DurbinLevinson<'a> {
    pub fn new(gammas: &'a [f64]) -> Result<Self> {
        ensure(!gammas.is_empty(), || "autocovariance sequence is empty".into())?;
        if !(gammas[0] > 0.0) {
            return Err(Error::NotPositiveDefinite {
                order: 0,
                variance: gammas[0],
            });
        }
        Ok(Self {
            gammas,
            phi: Vec::new(),
            scratch: Vec::new(),
            variance: gammas[0],
        })
    }

    pub fn order(&self) -> usize {
        self.phi.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.phi
    }

    /// Mean squared one-step prediction error at the current order.
    pub fn innovation_variance(&self) -> f64 {
        self.variance
    }

    /// Raise the order by one.
    pub fn step(&mut self) -> Result<()> {
        let k = self.phi.len() + 1;
        if k >= self.gammas.len() {
            return Err(Error::LengthMismatch {
                left: self.gammas.len(),
                right: k + 1,
            });
        }
        let g = self.gammas;
        let acc: f64 = self.phi.iter().enumerate().map(|(j, p)| p * g[k - 1 - j]).sum();
        let reflection = (g[k] - acc) / self.variance;
        self.scratch.clear();
        self.scratch
            .extend((0..k - 1).map(|j| self.phi[j] - reflection * self.phi[k - 2 - j]));
        self.scratch.push(reflection);
        std::mem::swap(&mut self.phi, &mut self.scratch);
        self.variance *= 1.0 - reflection * reflection;
        if !(self.variance > INNOVATION_TOLERANCE * g[0]) {
            return Err(Error::NotPositiveDefinite {
                order: k,
                variance: self.variance,
            });
        }
        Ok(())
    }

    /// Predict the next value from `history` (oldest first), whose length
    /// must equal the current order.
    pub fn predict(&self, history: &[f64]) -> f64 {
        debug_assert_eq!(history.len(), self.phi.len());
        self.phi.iter().zip(history.iter().rev()).map(|(p, x)| p * x).sum()
    }
}

/// Best linear prediction of `x_{n+1}` from `values = (x_1, …, x_n)` given
/// `gammas = (γ(0), …, γ(n))`.
pub fn durbin_levinson(gammas: &[f64], values: &[f64]) -> Result<f64> {
    if gammas.len() < values.len() + 1 {
        return Err(Error::LengthMismatch {
            left: gammas.len(),
            right: values.len() + 1,
        });
    }
    let mut dl = DurbinLevinson::new(gammas)?;
    for _ in 0..values.len() {
        dl.step()?;
    }
    Ok(dl.predict(values))
}

/// Predict the last `m` points of `path` one step ahead under `spec`.
#[derive(Debug, Clone)]
pub struct ForecastTask {
    spec: FouSpec,
    path: Path,
    m: usize,
}

impl ForecastTask {
    pub fn new(spec: FouSpec, path: Path, m: usize) -> Result<Self> {
        ensure(m >= 1 && m < path.len(), || {
            format!("need 1 <= m < n, got m = {m}, n = {}", path.len())
        })?;
        Ok(Self { spec, path, m })
    }

    pub fn spec(&self) -> &FouSpec {
        &self.spec
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Zero-based indices of the predicted points.
    pub fn targets(&self) -> std::ops::Range<usize> {
        self.path.len() - self.m..self.path.len()
    }

    /// Observed values at the targets, on the raw scale.
    pub fn actuals(&self) -> Vec<f64> {
        let raw = |z: f64| self.path.standardization().map_or(z, |s| s.to_raw(z));
        self.path.values()[self.targets()].iter().map(|&z| raw(z)).collect()
    }
}

/// Growing-window one-step predictions of the last `m` values.
///
/// Each target is predicted from every earlier observation. Predictions are
/// computed on the path's scale and mapped back to raw units when the path
/// carries standardization constants.
pub fn one_step_predictions(task: &ForecastTask) -> Result<Vec<f64>> {
    let n = task.path.len();
    let grid = AutocovarianceGrid::new(&task.spec, task.path.delta(), n - 1)?;
    predictions_with_gammas(grid.values(), &task.path, task.m)
}

/// As [`one_step_predictions`], with precomputed `γ(0), …, γ(n−1)`.
pub fn predictions_with_gammas(gammas: &[f64], path: &Path, m: usize) -> Result<Vec<f64>> {
    let n = path.len();
    ensure(m >= 1 && m < n, || format!("need 1 <= m < n, got m = {m}, n = {n}"))?;
    let xs = path.values();
    let first = n - m;
    let mut dl = DurbinLevinson::new(gammas)?;
    let mut out = Vec::with_capacity(m);
    for t in 1..n {
        dl.step()?;
        if t >= first {
            out.push(dl.predict(&xs[..t]));
        }
    }
    if let Some(s) = path.standardization() {
        out.iter_mut().for_each(|v| *v = s.to_raw(*v));
    }
    Ok(out)
}

/// Last-value predictor `X̂_i = X_{i−1}`, on the raw scale.
pub fn naive_predictions(path: &Path, m: usize) -> Result<Vec<f64>> {
    let n = path.len();
    ensure(m >= 1 && m < n, || format!("need 1 <= m < n, got m = {m}, n = {n}"))?;
    let raw = |z: f64| path.standardization().map_or(z, |s| s.to_raw(z));
    Ok(path.values()[n - m - 1..n - 1].iter().map(|&z| raw(z)).collect())
}

/// Mean absolute error `(1/m) Σ |actual − predicted|`.
pub fn mae(actuals: &[f64], predictions: &[f64]) -> Result<f64> {
    if actuals.len() != predictions.len() {
        return Err(Error::LengthMismatch {
            left: actuals.len(),
            right: predictions.len(),
        });
    }
    ensure(!actuals.is_empty(), || "MAE of an empty sample".into())?;
    let total: f64 = actuals.iter().zip(predictions).map(|(a, p)| (a - p).abs()).sum();
    Ok(total / actuals.len() as f64)
}
