//! Parameter estimation for `FOU(λ^{(p)}, σ, H)`.
//!
//! `H` and `σ` come from filtered quadratic variations, `λ` either from the
//! closed-form inversion of the stationary variance (plug-in) or from the
//! Whittle contrast (see [`whittle`]).

pub mod whittle;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{ensure, Error, Result};
use crate::filters::{dilate, quadratic_variation_of, Filter};
use crate::model::{g_closed_form, FouSpec};
use crate::path::{Path, Standardization};
use crate::simulate::path_standardize;

pub use whittle::{
    estimate_lambda_whittle, periodogram, whittle_contrast, WhittleConfig, WhittleEstimate, WhittleFixed,
    WhittleObjective, WhittleSettings,
};

/// `V_{n,a}` and `V_{n,a²}` with the resulting `Ĥ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HurstEstimate {
    pub hurst: f64,
    pub v_a: f64,
    pub v_a2: f64,
}

/// `Ĥ = ½ log₂(V_{n,a²} / V_{n,a})`, not clamped to `(0, 1)`.
pub fn estimate_h(path: &Path, filter: &Filter) -> Result<f64> {
    hurst_with_variations(path, filter).map(|e| e.hurst)
}

pub fn hurst_with_variations(path: &Path, filter: &Filter) -> Result<HurstEstimate> {
    ensure(filter.order() >= 2, || {
        format!("H estimation needs a filter of order >= 2, got {}", filter.order())
    })?;
    let dilated = dilate(filter);
    let needed = dilated.coeffs().len();
    if path.len() < needed {
        return Err(Error::PathTooShort {
            needed,
            got: path.len(),
        });
    }
    let v_a = quadratic_variation_of(path.values(), filter)?;
    let v_a2 = quadratic_variation_of(path.values(), &dilated)?;
    if v_a == 0.0 || v_a2 == 0.0 {
        return Err(Error::ZeroVariation);
    }
    Ok(HurstEstimate {
        hurst: 0.5 * (v_a2 / v_a).log2(),
        v_a,
        v_a2,
    })
}

/// `σ̂ = (−2 V_{n,a} / (Δ^{2Ĥ} Σ_i Σ_j a_i a_j |i−j|^{2Ĥ}))^{1/2}`.
pub fn estimate_sigma(path: &Path, filter: &Filter, h_hat: f64) -> Result<f64> {
    let v_a = quadratic_variation_of(path.values(), filter)?;
    sigma_from_variation(v_a, filter, h_hat, path.delta()).map(|(s, _)| s)
}

fn sigma_from_variation(v_a: f64, filter: &Filter, h_hat: f64, delta: f64) -> Result<(f64, f64)> {
    let radicand = -2.0 * v_a / (delta.powf(2.0 * h_hat) * filter.double_sum(h_hat));
    if !(radicand > 0.0 && radicand.is_finite()) {
        return Err(Error::NonPositiveRadicand { radicand });
    }
    Ok((radicand.sqrt(), radicand))
}

/// `μ̂₂ = (1/n) Σ X_i²`, without centering.
pub fn empirical_second_moment(path: &Path) -> f64 {
    if path.is_empty() {
        return 0.0;
    }
    path.values().iter().map(|x| x * x).sum::<f64>() / path.len() as f64
}

/// Base of the plug-in estimator, `σ̂² Ĥ Γ(2Ĥ) g(Ĥ) / μ̂₂`.
pub fn plugin_base(h_hat: f64, sigma_hat: f64, mu2_hat: f64, p: u32) -> f64 {
    sigma_hat * sigma_hat * h_hat * gamma(2.0 * h_hat) * g_closed_form(h_hat, p) / mu2_hat
}

/// `λ̂ = (σ̂² Ĥ Γ(2Ĥ) Π_{i<p}(i−Ĥ) / ((p−1)! μ̂₂))^{1/(2Ĥ)}`.
pub fn estimate_lambda_plugin(h_hat: f64, sigma_hat: f64, mu2_hat: f64, p: u32) -> Result<f64> {
    ensure(h_hat > 0.0 && h_hat.is_finite(), || format!("plug-in needs H > 0, got {h_hat}"))?;
    ensure(sigma_hat > 0.0 && sigma_hat.is_finite(), || format!("sigma must be positive, got {sigma_hat}"))?;
    ensure(mu2_hat > 0.0 && mu2_hat.is_finite(), || format!("second moment must be positive, got {mu2_hat}"))?;
    ensure(p >= 1, || "p must be >= 1".into())?;
    let base = plugin_base(h_hat, sigma_hat, mu2_hat, p);
    if !(base > 0.0 && base.is_finite()) {
        return Err(Error::NonPositiveBase { base });
    }
    Ok(base.powf(1.0 / (2.0 * h_hat)))
}

/// What [`fit`] estimates and how.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub filter: Filter,
    pub p: u32,
    /// Center and scale the path before estimating.
    pub standardize: bool,
    /// Fit `FOU(λ^{(p)}, H)`: `σ` is fixed to 1 (σ̂ is still reported).
    pub assume_unit_sigma: bool,
    pub whittle: Option<WhittleSettings>,
}

impl FitConfig {
    pub fn new(filter: Filter, p: u32) -> Self {
        Self {
            filter,
            p,
            standardize: false,
            assume_unit_sigma: false,
            whittle: None,
        }
    }

    /// Standardize the data and fix `σ = 1`.
    pub fn standardized(mut self) -> Self {
        self.standardize = true;
        self.assume_unit_sigma = true;
        self
    }

    pub fn with_whittle(mut self, settings: WhittleSettings) -> Self {
        self.whittle = Some(settings);
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.p >= 1, || "p must be >= 1".into())?;
        ensure(self.filter.order() >= 2, || {
            format!("filter order must be >= 2, got {}", self.filter.order())
        })
    }
}

/// Output of [`fit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub h_hat: f64,
    pub h_in_range: bool,
    pub sigma_hat: f64,
    pub sigma_fixed: bool,
    pub mu2_hat: f64,
    pub lambda_plugin: f64,
    pub lambda_whittle: Option<f64>,
    /// `FOU(λ̂^{(p)}, σ̂ or 1, Ĥ)`; absent when `Ĥ ∉ (0, 1)`.
    pub spec_hat: Option<FouSpec>,
    pub p: u32,
    pub n: usize,
    pub delta: f64,
    pub filter: String,
    pub standardization: Option<Standardization>,
    pub diagnostics: BTreeMap<String, f64>,
}

impl FitReport {
    /// `σ` used in the fitted model.
    pub fn sigma_model(&self) -> f64 {
        if self.sigma_fixed {
            1.0
        } else {
            self.sigma_hat
        }
    }
}

/// Standardize (optionally), then `Ĥ`, `σ̂`, `μ̂₂`, plug-in `λ̂` and
/// optionally Whittle `λ̂`. Errors carry the name of the failing stage.
pub fn fit(path: &Path, config: &FitConfig) -> Result<FitReport> {
    config.validate()?;
    let needed = 2 * config.filter.span() + 1;
    if path.len() < needed {
        return Err(Error::PathTooShort {
            needed,
            got: path.len(),
        }
        .at("quadratic_variation"));
    }
    let path = if config.standardize {
        path_standardize(path).map_err(|e| e.at("standardize"))?
    } else {
        path.clone()
    };

    let hurst = hurst_with_variations(&path, &config.filter).map_err(|e| e.at("hurst"))?;
    let h_hat = hurst.hurst;
    let h_in_range = h_hat > 0.0 && h_hat < 1.0;

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("v_a".to_string(), hurst.v_a);
    diagnostics.insert("v_a2".to_string(), hurst.v_a2);
    diagnostics.insert("filter_double_sum".to_string(), config.filter.double_sum(h_hat));

    let (sigma_hat, radicand) =
        sigma_from_variation(hurst.v_a, &config.filter, h_hat, path.delta()).map_err(|e| e.at("sigma"))?;
    diagnostics.insert("sigma_radicand".to_string(), radicand);
    let sigma_model = if config.assume_unit_sigma { 1.0 } else { sigma_hat };

    let mu2_hat = empirical_second_moment(&path);
    let lambda_plugin =
        estimate_lambda_plugin(h_hat, sigma_model, mu2_hat, config.p).map_err(|e| e.at("lambda_plugin"))?;
    diagnostics.insert("plugin_base".to_string(), plugin_base(h_hat, sigma_model, mu2_hat, config.p));

    let mut lambda_whittle = None;
    if let Some(settings) = &config.whittle {
        if h_in_range {
            let cfg = settings
                .resolve(path.horizon(), path.delta())
                .map_err(|e| e.at("whittle"))?;
            let fixed = WhittleFixed {
                hurst: h_hat,
                sigma: sigma_model,
                p: config.p,
            };
            let est = estimate_lambda_whittle(&path, fixed, &cfg).map_err(|e| e.at("whittle"))?;
            lambda_whittle = Some(est.lambda);
            diagnostics.insert("whittle_contrast".to_string(), est.contrast);
            diagnostics.insert("whittle_boundary_hit".to_string(), f64::from(u8::from(est.boundary_hit)));
            diagnostics.insert("whittle_freq_min".to_string(), cfg.freq_min);
            diagnostics.insert("whittle_freq_max".to_string(), cfg.freq_max);
            diagnostics.insert("whittle_n_freq".to_string(), cfg.n_freq as f64);
        } else {
            diagnostics.insert("whittle_skipped".to_string(), 1.0);
        }
    }

    let spec_hat = if h_in_range {
        Some(FouSpec::single(lambda_plugin, config.p, sigma_model, h_hat).map_err(|e| e.at("spec"))?)
    } else {
        None
    };

    Ok(FitReport {
        h_hat,
        h_in_range,
        sigma_hat,
        sigma_fixed: config.assume_unit_sigma,
        mu2_hat,
        lambda_plugin,
        lambda_whittle,
        spec_hat,
        p: config.p,
        n: path.len(),
        delta: path.delta(),
        filter: config.filter.to_string(),
        standardization: path.standardization(),
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::binomial_filter;
    use crate::model::stationary_variance;

    #[test]
    fn second_moment_examples() {
        assert_eq!(empirical_second_moment(&Path::new(vec![0.0; 5], 1.0).unwrap()), 0.0);
        assert_eq!(
            empirical_second_moment(&Path::new(vec![1.0, -1.0, 1.0, -1.0], 1.0).unwrap()),
            1.0
        );
    }

    #[test]
    fn plugin_examples() {
        assert!((estimate_lambda_plugin(0.5, 1.0, 0.5, 1).unwrap() - 1.0).abs() < 1e-14);
        let spec = FouSpec::single(0.8, 2, 1.0, 0.7).unwrap();
        let var = stationary_variance(&spec).unwrap();
        let l = estimate_lambda_plugin(0.7, 1.0, var, 2).unwrap();
        assert!((l - 0.8).abs() / 0.8 < 1e-12);
        assert!(matches!(
            estimate_lambda_plugin(1.2, 1.0, 1.0, 2),
            Err(Error::NonPositiveBase { .. })
        ));
    }

    #[test]
    fn hurst_needs_order_two() {
        let p = Path::new((0..50).map(|i| (i as f64).sin()).collect(), 0.1).unwrap();
        assert!(matches!(
            estimate_h(&p, &binomial_filter(1)),
            Err(Error::InvalidParameter(_))
        ));
        let short = Path::new(vec![1.0, 2.0, 0.5, 3.0], 0.1).unwrap();
        assert_eq!(
            estimate_h(&short, &binomial_filter(2)),
            Err(Error::PathTooShort { needed: 5, got: 4 })
        );
        let linear = Path::new((0..50).map(|i| 2.0 * i as f64 + 1.0).collect(), 0.1).unwrap();
        assert_eq!(estimate_h(&linear, &binomial_filter(2)), Err(Error::ZeroVariation));
    }

    #[test]
    fn empty_path_fails_at_quadratic_variation() {
        let empty = Path::new(Vec::new(), 0.1).unwrap();
        let err = fit(&empty, &FitConfig::new(binomial_filter(2), 2).standardized()).unwrap_err();
        assert_eq!(err.stage(), Some("quadratic_variation"));
        assert!(matches!(err.root(), Error::PathTooShort { .. }));
    }
}
