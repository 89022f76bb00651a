//! Discretized Whittle contrast for the rate `λ` of `FOU(λ^{(p)}, σ, H)`.
//!
//! ```text
//! U_T(λ) = 1/(4π) ∫ (log f(x, λ) + I_T(x) / f(x, λ)) w(x) dx
//! ```
//!
//! with `w` the indicator of `freq_min ≤ |x| ≤ freq_max`. The integrand is
//! even, so the integral is twice the positive half, evaluated with the
//! trapezoid rule on `n_freq` equispaced frequencies.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{ensure, Error, Result};
use crate::optimize::golden_section;
use crate::path::Path;

/// Search interval, frequency window and grid of the contrast.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WhittleConfig {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub freq_min: f64,
    pub freq_max: f64,
    pub n_freq: usize,
    pub tol: f64,
}

impl WhittleConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.lambda_lo > 0.0 && self.lambda_lo < self.lambda_hi && self.lambda_hi.is_finite(), || {
            format!("need 0 < lambda_lo < lambda_hi, got [{}, {}]", self.lambda_lo, self.lambda_hi)
        })?;
        ensure(self.freq_min > 0.0 && self.freq_min <= self.freq_max && self.freq_max.is_finite(), || {
            format!("need 0 < freq_min <= freq_max, got [{}, {}]", self.freq_min, self.freq_max)
        })?;
        ensure(self.n_freq >= 64, || format!("n_freq must be >= 64, got {}", self.n_freq))?;
        ensure(self.tol > 0.0, || "tol must be positive".into())?;
        Ok(())
    }
}

/// Partially specified Whittle settings; unset fields take defaults that
/// depend on the sampling grid (see [`WhittleSettings::resolve`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhittleSettings {
    #[serde(default = "default_lambda_lo")]
    pub lambda_lo: f64,
    #[serde(default = "default_lambda_hi")]
    pub lambda_hi: f64,
    #[serde(default)]
    pub freq_min: Option<f64>,
    #[serde(default)]
    pub freq_max: Option<f64>,
    #[serde(default)]
    pub n_freq: Option<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_lambda_lo() -> f64 {
    0.05
}
fn default_lambda_hi() -> f64 {
    5.0
}
fn default_tol() -> f64 {
    1e-4
}

impl Default for WhittleSettings {
    fn default() -> Self {
        Self {
            lambda_lo: default_lambda_lo(),
            lambda_hi: default_lambda_hi(),
            freq_min: None,
            freq_max: None,
            n_freq: None,
            tol: default_tol(),
        }
    }
}

impl WhittleSettings {
    /// Fill defaults for a sample of horizon `T` and spacing `Δ`:
    /// `freq_min = 2π/T`, `freq_max = min(π/Δ, 50 λ_hi)`, and enough
    /// frequencies for a spacing of at most `π/T` (clamped to `[64, 16384]`).
    pub fn resolve(&self, horizon: f64, delta: f64) -> Result<WhittleConfig> {
        let freq_min = self.freq_min.unwrap_or(2.0 * PI / horizon);
        let freq_max = self.freq_max.unwrap_or((PI / delta).min(50.0 * self.lambda_hi));
        let n_freq = self.n_freq.unwrap_or_else(|| {
            let needed = ((freq_max - freq_min) / (PI / horizon)).ceil() as usize + 1;
            needed.clamp(64, 16384)
        });
        let cfg = WhittleConfig {
            lambda_lo: self.lambda_lo,
            lambda_hi: self.lambda_hi,
            freq_min,
            freq_max,
            n_freq,
            tol: self.tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parameters held fixed while `λ` varies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhittleFixed {
    pub hurst: f64,
    pub sigma: f64,
    pub p: u32,
}

impl WhittleFixed {
    fn check(&self) -> Result<()> {
        ensure(self.hurst > 0.0 && self.hurst < 1.0, || {
            format!("Whittle contrast needs H in (0, 1), got {}", self.hurst)
        })?;
        ensure(self.sigma > 0.0, || "sigma must be positive".into())?;
        ensure(self.p >= 1, || "p must be >= 1".into())
    }

    /// `log f(x, λ)` for `x > 0`.
    fn log_density(&self, x: f64, lambda: f64) -> f64 {
        let h = self.hurst;
        let p = self.p as f64;
        let log_pref = 2.0 * self.sigma.ln() + gamma(2.0 * h + 1.0).ln() + (h * PI).sin().ln() - (2.0 * PI).ln();
        log_pref + (2.0 * p - 1.0 - 2.0 * h) * x.ln() - p * (lambda * lambda + x * x).ln()
    }
}

/// Discretized second-order periodogram
/// `I_T(x) = (1/2πT) |Σ_j X_{jΔ} e^{-i jΔ x} Δ|²`.
pub fn periodogram(path: &Path, x: f64) -> Result<f64> {
    let nyquist = PI / path.delta();
    if x.abs() > nyquist * (1.0 + 1e-12) {
        return Err(Error::FrequencyAboveNyquist { frequency: x, nyquist });
    }
    Ok(periodogram_unchecked(path.values(), path.delta(), x))
}

fn periodogram_unchecked(xs: &[f64], delta: f64, x: f64) -> f64 {
    let horizon = xs.len() as f64 * delta;
    let step = Complex64::from_polar(1.0, -delta * x);
    let mut phase = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, &v) in xs.iter().enumerate() {
        // re-anchor the rotating phasor to bound round-off growth
        if j % 256 == 0 {
            phase = Complex64::from_polar(1.0, -(j as f64) * delta * x);
        }
        acc += phase * v;
        phase *= step;
    }
    let ft = acc * delta;
    ft.norm_sqr() / (2.0 * PI * horizon)
}

/// Trapezoid nodes and weights on `[freq_min, freq_max]`.
fn frequency_grid(cfg: &WhittleConfig) -> Vec<(f64, f64)> {
    let n = cfg.n_freq;
    let width = cfg.freq_max - cfg.freq_min;
    let h = width / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let x = if i + 1 == n { cfg.freq_max } else { cfg.freq_min + i as f64 * h };
            let w = if i == 0 || i + 1 == n { 0.5 * h } else { h };
            (x, w)
        })
        .collect()
}

/// Periodogram of a path sampled once on the contrast's frequency grid.
#[derive(Debug, Clone)]
pub struct WhittleObjective {
    fixed: WhittleFixed,
    nodes: Vec<(f64, f64)>,
    ordinates: Vec<f64>,
}

impl WhittleObjective {
    pub fn from_path(path: &Path, fixed: WhittleFixed, cfg: &WhittleConfig) -> Result<Self> {
        cfg.validate()?;
        fixed.check()?;
        let nyquist = PI / path.delta();
        if cfg.freq_max > nyquist * (1.0 + 1e-12) {
            return Err(Error::FrequencyAboveNyquist {
                frequency: cfg.freq_max,
                nyquist,
            });
        }
        let nodes = frequency_grid(cfg);
        let ordinates = nodes
            .par_iter()
            .map(|&(x, _)| periodogram_unchecked(path.values(), path.delta(), x))
            .collect();
        Ok(Self {
            fixed,
            nodes,
            ordinates,
        })
    }

    /// Replace the periodogram by an arbitrary spectrum (e.g. a model density).
    pub fn from_spectrum(spectrum: impl Fn(f64) -> f64, fixed: WhittleFixed, cfg: &WhittleConfig) -> Result<Self> {
        cfg.validate()?;
        fixed.check()?;
        let nodes = frequency_grid(cfg);
        let ordinates = nodes.iter().map(|&(x, _)| spectrum(x)).collect();
        Ok(Self {
            fixed,
            nodes,
            ordinates,
        })
    }

    /// `U_T(λ)`.
    pub fn contrast(&self, lambda: f64) -> f64 {
        if self.nodes.len() < 2 || self.nodes[0].0 == self.nodes[self.nodes.len() - 1].0 {
            return 0.0;
        }
        let half: f64 = self
            .nodes
            .iter()
            .zip(&self.ordinates)
            .map(|(&(x, w), &i)| {
                let log_f = self.fixed.log_density(x, lambda);
                w * (log_f + i * (-log_f).exp())
            })
            .sum();
        2.0 * half / (4.0 * PI)
    }
}

/// `U_T(λ)` for one path.
pub fn whittle_contrast(path: &Path, lambda: f64, fixed: WhittleFixed, cfg: &WhittleConfig) -> Result<f64> {
    ensure(lambda >= cfg.lambda_lo && lambda <= cfg.lambda_hi, || {
        format!("lambda {lambda} outside [{}, {}]", cfg.lambda_lo, cfg.lambda_hi)
    })?;
    Ok(WhittleObjective::from_path(path, fixed, cfg)?.contrast(lambda))
}

/// Minimizer of the contrast over `[λ_lo, λ_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhittleEstimate {
    pub lambda: f64,
    pub contrast: f64,
    /// The minimizer sits on an end of the search interval.
    pub boundary_hit: bool,
}

pub fn minimize_contrast(objective: &WhittleObjective, cfg: &WhittleConfig) -> WhittleEstimate {
    let m = golden_section(|l| objective.contrast(l), cfg.lambda_lo, cfg.lambda_hi, cfg.tol);
    let boundary_hit = m.x - cfg.lambda_lo <= 2.0 * cfg.tol || cfg.lambda_hi - m.x <= 2.0 * cfg.tol;
    WhittleEstimate {
        lambda: m.x,
        contrast: m.value,
        boundary_hit,
    }
}

/// `λ̂_U = argmin_{λ ∈ Λ} U_T(λ)` by golden-section search.
pub fn estimate_lambda_whittle(path: &Path, fixed: WhittleFixed, cfg: &WhittleConfig) -> Result<WhittleEstimate> {
    let objective = WhittleObjective::from_path(path, fixed, cfg)?;
    Ok(minimize_contrast(&objective, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{spectral_density, FouSpec};

    fn cfg() -> WhittleConfig {
        WhittleConfig {
            lambda_lo: 0.05,
            lambda_hi: 5.0,
            freq_min: 0.05,
            freq_max: 40.0,
            n_freq: 2048,
            tol: 1e-7,
        }
    }

    #[test]
    fn periodogram_examples() {
        let zero = Path::new(vec![0.0; 100], 0.1).unwrap();
        assert_eq!(periodogram(&zero, 1.3).unwrap(), 0.0);

        let delta = 0.01;
        let omega = 3.0;
        let n = 100_000; // T = 1000, ωT ≫ 1
        let p = Path::new((1..=n).map(|j| (omega * j as f64 * delta).cos()).collect(), delta).unwrap();
        let t = n as f64 * delta;
        let got = periodogram(&p, omega).unwrap();
        assert!((got - t / (8.0 * PI)).abs() / (t / (8.0 * PI)) < 1e-3, "{got}");
        for x in [0.2, 1.7, 30.0] {
            let a = periodogram(&p, x).unwrap();
            let b = periodogram(&p, -x).unwrap();
            assert!((a - b).abs() <= 1e-9 * a.max(1e-12));
        }
        assert!(matches!(
            periodogram(&p, 400.0),
            Err(Error::FrequencyAboveNyquist { .. })
        ));
    }

    #[test]
    fn empty_window_gives_zero() {
        let p = Path::new((0..200).map(|i| (i as f64 * 0.37).sin()).collect(), 0.1).unwrap();
        let fixed = WhittleFixed {
            hurst: 0.7,
            sigma: 1.0,
            p: 2,
        };
        let c = WhittleConfig {
            freq_min: 1.0,
            freq_max: 1.0,
            ..cfg()
        };
        assert_eq!(whittle_contrast(&p, 0.8, fixed, &c).unwrap(), 0.0);
    }

    #[test]
    fn model_spectrum_is_minimized_at_truth() {
        for (lambda0, h, p) in [(0.8, 0.7, 2u32), (0.3, 0.5, 1), (2.0, 0.3, 3)] {
            let spec = FouSpec::single(lambda0, p, 1.0, h).unwrap();
            let fixed = WhittleFixed { hurst: h, sigma: 1.0, p };
            let obj = WhittleObjective::from_spectrum(|x| spectral_density(&spec, x).unwrap(), fixed, &cfg()).unwrap();
            let est = minimize_contrast(&obj, &cfg());
            assert!((est.lambda - lambda0).abs() < 1e-5, "{} vs {lambda0}", est.lambda);
            assert!(!est.boundary_hit);
        }
    }

    #[test]
    fn refining_grid_is_stable_for_smooth_spectra() {
        let spec = FouSpec::single(0.8, 2, 1.0, 0.7).unwrap();
        let fixed = WhittleFixed {
            hurst: 0.7,
            sigma: 1.0,
            p: 2,
        };
        let coarse = WhittleObjective::from_spectrum(|x| spectral_density(&spec, x).unwrap(), fixed, &cfg()).unwrap();
        let fine_cfg = WhittleConfig {
            n_freq: 4096,
            ..cfg()
        };
        let fine = WhittleObjective::from_spectrum(|x| spectral_density(&spec, x).unwrap(), fixed, &fine_cfg).unwrap();
        for lambda in [0.3, 0.8, 2.0] {
            let a = coarse.contrast(lambda);
            let b = fine.contrast(lambda);
            assert!((a - b).abs() / b.abs() < 1e-3, "{a} vs {b}");
        }
    }

    #[test]
    fn default_resolution() {
        let cfg = WhittleSettings::default().resolve(100.0, 0.02).unwrap();
        assert!((cfg.freq_min - 2.0 * PI / 100.0).abs() < 1e-15);
        assert!((cfg.freq_max - PI / 0.02).abs() < 1e-12);
        assert!(cfg.n_freq >= 4900);
        let coarse = WhittleSettings::default().resolve(100.0, 0.001).unwrap();
        assert_eq!(coarse.freq_max, 250.0);
    }
}
