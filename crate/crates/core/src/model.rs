//! The FOU(p) model and its analytic objects.
//!
//! A spec `FOU(λ₁^{(p₁)}, …, λ_q^{(p_q)}, σ, H)` is the composition
//! `T_{λ₁}^{p₁} ∘ … ∘ T_{λ_q}^{p_q}` applied to `σ B_H`, where
//! `T_λ(y)(t) = ∫_{-∞}^t e^{-λ(t-s)} dy(s)`. Its spectral density is
//!
//! ```text
//! f(x) = σ² Γ(2H+1) sin(Hπ) |x|^{2p-1-2H} / (2π Π_i (λ_i² + x²)^{p_i})
//! ```
//!
//! and everything else here (variance, autocovariance) is derived from it,
//! either in closed form (q = 1) or by quadrature.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{ensure, Error, Result};
use crate::fbm::check_hurst;
use crate::quadrature::{wynn_epsilon, Quadrature};

/// One distinct rate `λ_i` with its multiplicity `p_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateComponent {
    pub value: f64,
    pub multiplicity: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    lambdas: Vec<RateComponent>,
    sigma: f64,
    hurst: f64,
}

/// Parameters of a FOU(p) process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct FouSpec {
    lambdas: Vec<RateComponent>,
    sigma: f64,
    hurst: f64,
}

impl TryFrom<RawSpec> for FouSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        FouSpec::new(raw.lambdas, raw.sigma, raw.hurst)
    }
}

impl FouSpec {
    pub fn new(lambdas: Vec<RateComponent>, sigma: f64, hurst: f64) -> Result<Self> {
        ensure(!lambdas.is_empty(), || "at least one rate is required".into())?;
        for c in &lambdas {
            ensure(c.value.is_finite() && c.value > 0.0, || {
                format!("rates must be positive, got {}", c.value)
            })?;
            ensure(c.multiplicity >= 1, || "multiplicities must be >= 1".into())?;
        }
        ensure(lambdas.windows(2).all(|w| w[0].value < w[1].value), || {
            "rates must be strictly increasing".into()
        })?;
        ensure(sigma.is_finite() && sigma > 0.0, || format!("sigma must be positive, got {sigma}"))?;
        check_hurst(hurst)?;
        Ok(Self { lambdas, sigma, hurst })
    }

    /// `FOU(λ^{(p)}, σ, H)`.
    pub fn single(lambda: f64, p: u32, sigma: f64, hurst: f64) -> Result<Self> {
        Self::new(
            vec![RateComponent {
                value: lambda,
                multiplicity: p,
            }],
            sigma,
            hurst,
        )
    }

    pub fn components(&self) -> &[RateComponent] {
        &self.lambdas
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// Total order `p = Σ p_i`.
    pub fn order(&self) -> u32 {
        self.lambdas.iter().map(|c| c.multiplicity).sum()
    }

    /// Number of distinct rates `q`.
    pub fn distinct_rates(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambdas[0].value
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambdas[self.lambdas.len() - 1].value
    }

    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::new(self.lambdas.clone(), sigma, self.hurst)
    }

    /// Exponent `2p - 1 - 2H` of `|x|` in the spectral density numerator.
    pub fn spectral_exponent(&self) -> f64 {
        2.0 * self.order() as f64 - 1.0 - 2.0 * self.hurst
    }

    fn spectral_prefactor(&self) -> f64 {
        let h = self.hurst;
        self.sigma * self.sigma * gamma(2.0 * h + 1.0) * (h * PI).sin() / (2.0 * PI)
    }
}

/// `K_i = 1 / Π_{j≠i} (1 - λ_j/λ_i)`.
pub fn ki_coefficients(spec: &FouSpec) -> Vec<f64> {
    let rates: Vec<f64> = spec.components().iter().map(|c| c.value).collect();
    rates
        .iter()
        .enumerate()
        .map(|(i, &li)| {
            let prod: f64 = rates
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &lj)| 1.0 - lj / li)
                .product();
            1.0 / prod
        })
        .collect()
}

/// `g(H) = Π_{i=1}^{p-1} (i - H) / (p-1)!`, equal to 1 when `p = 1`.
pub fn g_closed_form(hurst: f64, p: u32) -> f64 {
    (1..p).map(|i| (i as f64 - hurst) / i as f64).product()
}

/// Stationary variance `σ² H Γ(2H) g(H) / λ^{2H}` of `FOU(λ^{(p)}, σ, H)`.
pub fn stationary_variance(spec: &FouSpec) -> Result<f64> {
    if spec.distinct_rates() != 1 {
        return Err(Error::UnsupportedModel(format!(
            "closed-form variance needs a single rate, got q = {}",
            spec.distinct_rates()
        )));
    }
    let h = spec.hurst();
    let lambda = spec.lambda_min();
    let sigma = spec.sigma();
    Ok(sigma * sigma * h * gamma(2.0 * h) * g_closed_form(h, spec.order()) / lambda.powf(2.0 * h))
}

/// `g(H)` from its double-integral representation, evaluated numerically.
///
/// ```text
/// g(H) = (2H-1)/Γ(2H) ∫∫ P(u) P(v) e^{-u-v} |u-v|^{2H-2} du dv,
/// P(u) = Σ_{i<p} C(p-1, i) (-u)^i / i!
/// ```
///
/// Folding the symmetric integrand onto `u = v + w` and substituting
/// `w = t^{1/(2H-1)}` absorbs the diagonal singularity; both remaining
/// integrals are done adaptively. Only defined for `H > 1/2`.
pub fn g_quadrature_oracle(hurst: f64, p: u32) -> Result<f64> {
    ensure(hurst > 0.5 && hurst < 1.0, || {
        format!("integral representation needs 1/2 < H < 1, got {hurst}")
    })?;
    ensure(p >= 1, || "p must be >= 1".into())?;
    let weights: Vec<f64> = (0..p as usize)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(p as usize - 1, i) / factorial(i)
        })
        .collect();
    let poly = |u: f64| weights.iter().rev().fold(0.0, |acc, &c| acc * u + c);

    let inner_q = |w: f64| Quadrature {
        // the integrand grows like w^{p-1}; an absolute floor that ignores
        // this is below round-off for large w
        abs_tol: 1e-14 * (1.0 + w).powi(p as i32 - 1),
        rel_tol: 1e-12,
        max_intervals: 500,
    };
    const V_MAX: f64 = 45.0;
    const W_MAX: f64 = 80.0;
    // A failed inner integral poisons the outer one with NaN, which the
    // outer integrator reports as non-convergence.
    let inner = |w: f64| -> f64 {
        inner_q(w)
            .integrate_with_breaks(|v| poly(v + w) * poly(v) * (-2.0 * v).exp(), &[0.0, 2.0, 8.0, 20.0, V_MAX])
            .map_or(f64::NAN, |est| est.value)
    };

    let beta = 1.0 / (2.0 * hurst - 1.0);
    let t_of = |w: f64| w.powf(2.0 * hurst - 1.0);
    let outer = |t: f64| -> f64 {
        let w = t.powf(beta);
        if w > W_MAX {
            0.0
        } else {
            (-w).exp() * inner(w)
        }
    };
    let breaks = [0.0, t_of(0.5), t_of(2.0), t_of(10.0), t_of(30.0), t_of(W_MAX)];
    let outer_q = Quadrature {
        abs_tol: 1e-12,
        rel_tol: 1e-11,
        max_intervals: 400,
    };
    let est = outer_q.integrate_with_breaks(outer, &breaks)?;
    Ok(2.0 / gamma(2.0 * hurst) * est.value)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Spectral density `f(x)`.
pub fn spectral_density(spec: &FouSpec, x: f64) -> Result<f64> {
    let e = spec.spectral_exponent();
    if x == 0.0 {
        if e < 0.0 {
            return Err(Error::SingularAtZero { exponent: e });
        }
        if e > 0.0 {
            return Ok(0.0);
        }
    }
    Ok(density_unchecked(spec, x))
}

fn density_unchecked(spec: &FouSpec, x: f64) -> f64 {
    let x2 = x * x;
    let denom: f64 = spec
        .components()
        .iter()
        .map(|c| (c.value * c.value + x2).powi(c.multiplicity as i32))
        .product();
    let num = if x == 0.0 && spec.spectral_exponent() == 0.0 {
        1.0
    } else {
        x.abs().powf(spec.spectral_exponent())
    };
    spec.spectral_prefactor() * num / denom
}

fn spectral_quadrature() -> Quadrature {
    Quadrature {
        abs_tol: 0.0,
        rel_tol: 1e-12,
        max_intervals: 4000,
    }
}

/// `∫_ℝ f(x) dx`, the variance as total spectral mass.
///
/// Near zero the `|x|^{2p-1-2H}` factor is removed by a power substitution and
/// the `x^{-1-2H}` tail is mapped onto a finite interval, so no truncation is
/// involved.
pub fn spectral_integral_variance(spec: &FouSpec) -> Result<f64> {
    spectral_integral_variance_with(spec, &spectral_quadrature())
}

pub(crate) fn spectral_integral_variance_with(spec: &FouSpec, q: &Quadrature) -> Result<f64> {
    let f = |x: f64| density_unchecked(spec, x);
    let e = spec.spectral_exponent();
    let s = 0.5 * spec.lambda_min();
    let a = 10.0 * spec.lambda_max();
    let head = q.integrate_power_origin(f, e, s)?;
    let body = q.integrate_with_breaks(f, &body_breaks(s, a, spec))?;
    let tail = q.integrate_power_tail(f, 2.0 * spec.hurst(), a)?;
    Ok(2.0 * (head.value + body.value + tail.value))
}

fn body_breaks(s: f64, a: f64, spec: &FouSpec) -> Vec<f64> {
    let mut breaks = vec![s];
    for c in spec.components() {
        for m in [0.5, 1.0, 2.0, 4.0] {
            let x = m * c.value;
            if x > s && x < a {
                breaks.push(x);
            }
        }
    }
    breaks.push(a);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
}

/// Autocovariance `γ(τ) = ∫_ℝ f(x) cos(τx) dx` by numerical Fourier inversion.
pub fn autocovariance(spec: &FouSpec, tau: f64) -> Result<f64> {
    let variance = spectral_integral_variance(spec)?;
    autocovariance_scaled(spec, tau, variance)
}

/// Number of extrapolated half-period panels in the oscillatory tail.
const TAIL_PANELS: usize = 41;

fn autocovariance_scaled(spec: &FouSpec, tau: f64, variance: f64) -> Result<f64> {
    ensure(tau.is_finite(), || "lag must be finite".into())?;
    let tau = tau.abs();
    if tau == 0.0 {
        return Ok(variance);
    }
    let q = Quadrature {
        abs_tol: 1e-13 * variance,
        rel_tol: 1e-11,
        max_intervals: 4000,
    };
    let half_period = PI / tau;
    let e = spec.spectral_exponent();
    let g = |x: f64| density_unchecked(spec, x) * (tau * x).cos();

    let s = (0.5 * spec.lambda_min()).min(half_period);
    let a = 10.0 * spec.lambda_max();
    let start = (a / half_period).ceil().max(1.0) * half_period;

    let head = q.integrate_power_origin(g, e, s)?;

    let mut breaks = vec![s];
    let mut x = a;
    while x < start {
        breaks.push(x);
        x *= 4.0;
    }
    let panels = (start / half_period).round() as usize;
    for k in 1..panels {
        let b = k as f64 * half_period;
        if b > s {
            breaks.push(b);
        }
    }
    breaks.push(start);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let body_q = Quadrature {
        max_intervals: q.max_intervals + breaks.len(),
        ..q
    };
    let body = body_q.integrate_with_breaks(g, &breaks)?;

    let mut partial = Vec::with_capacity(TAIL_PANELS);
    let mut acc = 0.0;
    for k in 0..TAIL_PANELS {
        let lo = start + k as f64 * half_period;
        acc += q.integrate(g, lo, lo + half_period)?.value;
        partial.push(acc);
    }
    let tail = wynn_epsilon(&partial);
    if !(tail.error <= 1e-9 * variance) {
        return Err(Error::QuadratureNotConverged {
            estimate: tail.value,
            error: tail.error,
            intervals: TAIL_PANELS,
        });
    }
    Ok(2.0 * (head.value + body.value + tail.value))
}

/// Model autocovariances `γ(kΔ)` for `k = 0..=max_lag`, computed once.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocovarianceGrid {
    delta: f64,
    values: Vec<f64>,
}

impl AutocovarianceGrid {
    pub fn new(spec: &FouSpec, delta: f64, max_lag: usize) -> Result<Self> {
        ensure(delta > 0.0 && delta.is_finite(), || format!("delta must be positive, got {delta}"))?;
        let variance = spectral_integral_variance(spec)?;
        let values = (0..=max_lag)
            .into_par_iter()
            .map(|k| autocovariance_scaled(spec, k as f64 * delta, variance))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { delta, values })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `γ(0), γ(Δ), …`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ou(lambda: f64) -> FouSpec {
        FouSpec::single(lambda, 1, 1.0, 0.5).unwrap()
    }

    #[test]
    fn spec_validation() {
        let c = |value, multiplicity| RateComponent { value, multiplicity };
        assert!(FouSpec::new(vec![c(1.0, 1), c(1.0, 1)], 1.0, 0.5).is_err());
        assert!(FouSpec::new(vec![c(2.0, 1), c(1.0, 1)], 1.0, 0.5).is_err());
        assert!(FouSpec::new(vec![c(1.0, 0)], 1.0, 0.5).is_err());
        assert!(FouSpec::new(vec![], 1.0, 0.5).is_err());
        assert!(FouSpec::new(vec![c(1.0, 1)], 0.0, 0.5).is_err());
        assert!(FouSpec::new(vec![c(1.0, 1)], 1.0, 1.0).is_err());
        let s = FouSpec::new(vec![c(0.5, 2), c(2.0, 1)], 1.0, 0.3).unwrap();
        assert_eq!(s.order(), 3);
        assert_eq!(s.distinct_rates(), 2);
    }

    #[test]
    fn json_shape() {
        let s: FouSpec =
            serde_json::from_str(r#"{"lambdas":[{"value":0.8,"multiplicity":2}],"sigma":1.0,"hurst":0.7}"#).unwrap();
        assert_eq!(s, FouSpec::single(0.8, 2, 1.0, 0.7).unwrap());
        let back = serde_json::to_string(&s).unwrap();
        assert_eq!(back, r#"{"lambdas":[{"value":0.8,"multiplicity":2}],"sigma":1.0,"hurst":0.7}"#);
        let bad = serde_json::from_str::<FouSpec>(r#"{"lambdas":[{"value":-1,"multiplicity":2}],"sigma":1.0,"hurst":0.7}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn ki_values() {
        assert_eq!(ki_coefficients(&ou(3.0)), vec![1.0]);
        let c = |value| RateComponent { value, multiplicity: 1 };
        let s = FouSpec::new(vec![c(1.0), c(2.0)], 1.0, 0.5).unwrap();
        assert_eq!(ki_coefficients(&s), vec![-1.0, 2.0]);
    }

    #[test]
    fn closed_form_variance() {
        assert!((stationary_variance(&ou(1.0)).unwrap() - 0.5).abs() < 1e-15);
        let p2 = FouSpec::single(1.0, 2, 1.0, 0.5).unwrap();
        assert!((stationary_variance(&p2).unwrap() - 0.25).abs() < 1e-15);
        let c = |value| RateComponent { value, multiplicity: 1 };
        let q2 = FouSpec::new(vec![c(1.0), c(2.0)], 1.0, 0.5).unwrap();
        assert!(matches!(stationary_variance(&q2), Err(Error::UnsupportedModel(_))));
    }

    #[test]
    fn g_closed_form_values() {
        assert_eq!(g_closed_form(1.0, 3), 0.0);
        assert_eq!(g_closed_form(2.0, 3), 0.0);
        assert_eq!(g_closed_form(0.0, 5), 1.0);
        assert_eq!(g_closed_form(0.4, 1), 1.0);
        assert!((g_closed_form(0.7, 2) - 0.3).abs() < 1e-15);
        assert!((g_closed_form(0.6, 3) - 0.28).abs() < 1e-15);
    }

    #[test]
    fn g_oracle_rejects_rough_hurst() {
        assert!(g_quadrature_oracle(0.4, 2).is_err());
    }

    #[test]
    fn g_oracle_examples() {
        assert!((g_quadrature_oracle(0.7, 2).unwrap() - 0.3).abs() < 1e-6);
        assert!((g_quadrature_oracle(0.6, 3).unwrap() - 0.28).abs() < 1e-6);
        assert!((g_quadrature_oracle(0.7, 1).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn density_examples() {
        let f0 = spectral_density(&ou(1.0), 0.0).unwrap();
        assert!((f0 - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let s = FouSpec::single(0.8, 2, 1.0, 0.7).unwrap();
        let s2 = s.with_sigma(2.0).unwrap();
        for x in [0.1, 1.0, 7.5] {
            let a = spectral_density(&s, x).unwrap();
            assert_eq!(a, spectral_density(&s, -x).unwrap());
            assert!((spectral_density(&s2, x).unwrap() - 4.0 * a).abs() < 1e-15 * a.max(1.0));
        }
        let rough = FouSpec::single(0.8, 1, 1.0, 0.7).unwrap();
        assert!(matches!(spectral_density(&rough, 0.0), Err(Error::SingularAtZero { .. })));
        assert_eq!(spectral_density(&s, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn spectral_variance_examples() {
        let v = spectral_integral_variance(&ou(1.0)).unwrap();
        assert!((v - 0.5).abs() < 1e-6);
        let s = FouSpec::single(0.8, 2, 1.0, 0.7).unwrap();
        let closed = stationary_variance(&s).unwrap();
        assert!((spectral_integral_variance(&s).unwrap() - closed).abs() / closed < 1e-4);
    }

    #[test]
    fn ou_autocovariance() {
        for lambda in [0.5, 1.0, 2.0] {
            let spec = ou(lambda);
            for tau in [0.1, 0.5, 1.0, 2.0] {
                let g = autocovariance(&spec, tau).unwrap();
                let exact = (-lambda * tau).exp() / (2.0 * lambda);
                assert!((g - exact).abs() < 1e-5, "λ={lambda} τ={tau}: {g} vs {exact}");
            }
        }
    }

    #[test]
    fn autocovariance_at_zero_matches_variance() {
        let s = FouSpec::single(0.8, 3, 1.3, 0.35).unwrap();
        let g0 = autocovariance(&s, 0.0).unwrap();
        let v = stationary_variance(&s).unwrap();
        assert!((g0 - v).abs() / v < 1e-4);
    }

    #[test]
    fn grid_is_bounded_by_variance() {
        let s = FouSpec::single(0.8, 2, 1.0, 0.3).unwrap();
        let grid = AutocovarianceGrid::new(&s, 0.25, 80).unwrap();
        let g0 = grid.values()[0];
        assert!(grid.values().iter().all(|g| g.abs() <= g0 * (1.0 + 1e-9)));
    }
}
