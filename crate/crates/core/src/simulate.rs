//! Equispaced FOU(p) sample paths.
//!
//! A path is produced by drawing `σ B_H` increments on an extended grid that
//! starts `burn_in` time units before the first retained sample, then applying
//! the `T_λ` recursion once per unit of multiplicity. Each pass consumes the
//! increments of the previous pass's output.

use crate::error::{ensure, Error, Result};
use crate::fbm::fgn_from_rng;
use crate::model::FouSpec;
use crate::path::{Path, Standardization};
use crate::rng;

/// Burn-in, in units of `1/λ_min`, used unless overridden.
pub const DEFAULT_BURN_IN_RATES: f64 = 20.0;

/// What to simulate: model, grid and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    spec: FouSpec,
    n: usize,
    delta: f64,
    burn_in: f64,
    seed: u64,
}

impl SimulationPlan {
    /// Plan with the default burn-in of `20 / λ_min`.
    pub fn new(spec: FouSpec, n: usize, delta: f64, seed: u64) -> Result<Self> {
        ensure(n >= 2, || format!("sample size must be >= 2, got {n}"))?;
        ensure(delta.is_finite() && delta > 0.0, || format!("delta must be positive, got {delta}"))?;
        let burn_in = DEFAULT_BURN_IN_RATES / spec.lambda_min();
        Ok(Self {
            spec,
            n,
            delta,
            burn_in,
            seed,
        })
    }

    /// Plan over `[0, horizon]` with `n` points (`Δ = T/n`).
    pub fn over_horizon(spec: FouSpec, horizon: f64, n: usize, seed: u64) -> Result<Self> {
        ensure(horizon.is_finite() && horizon > 0.0, || format!("horizon must be positive, got {horizon}"))?;
        Self::new(spec, n, horizon / n as f64, seed)
    }

    /// Override the burn-in time. Values below `20 / λ_min` leave a visible
    /// start-up transient.
    pub fn with_burn_in(mut self, burn_in: f64) -> Result<Self> {
        ensure(burn_in.is_finite() && burn_in >= 0.0, || format!("burn-in must be >= 0, got {burn_in}"))?;
        self.burn_in = burn_in;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn spec(&self) -> &FouSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn burn_in(&self) -> f64 {
        self.burn_in
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn horizon(&self) -> f64 {
        self.n as f64 * self.delta
    }

    /// Number of grid steps spent on burn-in.
    pub fn burn_in_steps(&self) -> usize {
        (self.burn_in / self.delta).ceil() as usize
    }
}

/// Discretized `T_λ`: `y_k = e^{-λΔ} y_{k-1} + e^{-λΔ/2} ΔY_k`, starting from `y = 0`.
///
/// Each increment is weighted at the midpoint of its step.
pub fn apply_t_lambda(increments: &[f64], lambda: f64, delta: f64) -> Vec<f64> {
    let decay = (-lambda * delta).exp();
    let weight = (-0.5 * lambda * delta).exp();
    let mut y = 0.0;
    increments
        .iter()
        .map(|&dy| {
            y = decay * y + weight * dy;
            y
        })
        .collect()
}

/// Apply the operator composition of `spec` to driving increments.
///
/// Rates are applied innermost first (`λ_q` before `λ_1`). Returns the
/// process values on the same grid as the increments.
pub fn apply_operators(spec: &FouSpec, increments: &[f64], delta: f64) -> Vec<f64> {
    let mut incs = increments.to_vec();
    let mut values = Vec::new();
    let passes: Vec<f64> = spec
        .components()
        .iter()
        .rev()
        .flat_map(|c| std::iter::repeat(c.value).take(c.multiplicity as usize))
        .collect();
    for (i, &lambda) in passes.iter().enumerate() {
        values = apply_t_lambda(&incs, lambda, delta);
        if i + 1 < passes.len() {
            let mut prev = 0.0;
            for (inc, &v) in incs.iter_mut().zip(&values) {
                *inc = v - prev;
                prev = v;
            }
        }
    }
    values
}

/// Simulate one stationary path according to `plan`.
pub fn simulate_fou(plan: &SimulationPlan) -> Result<Path> {
    let spec = &plan.spec;
    let burn = plan.burn_in_steps();
    let total = burn + plan.n;
    let mut rng = rng::from_seed(plan.seed);
    let noise = fgn_from_rng(total, spec.hurst(), &mut rng)?;
    let step = spec.sigma() * plan.delta.powf(spec.hurst());
    let increments: Vec<f64> = noise.into_iter().map(|z| step * z).collect();
    let mut values = apply_operators(spec, &increments, plan.delta);
    values.drain(..burn);
    Path::new(values, plan.delta)
}

/// Center by the sample mean and scale by the sample standard deviation
/// (divisor `n`). The removed constants are recorded on the returned path.
pub fn path_standardize(path: &Path) -> Result<Path> {
    let n = path.len();
    if n < 2 {
        return Err(Error::PathTooShort { needed: 2, got: n });
    }
    let xs = path.values();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    let sd = var.sqrt();
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(sd > 1e-13 * scale) {
        return Err(Error::DegeneratePath);
    }
    let standardized = Path::new(xs.iter().map(|x| (x - mean) / sd).collect(), path.delta())?;
    let constants = match path.standardization() {
        Some(prev) => Standardization {
            mean: prev.to_raw(mean),
            sd: prev.sd * sd,
        },
        None => Standardization { mean, sd },
    };
    Ok(standardized.with_standardization(constants))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_increments_stay_zero() {
        assert!(apply_t_lambda(&[0.0; 10], 1.3, 0.1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fast_rate_is_memoryless() {
        let incs = [0.3, -1.2, 0.7, 2.0];
        let delta = 0.5;
        let lambda = 100.0; // λΔ = 50
        let out = apply_t_lambda(&incs, lambda, delta);
        let w = (-0.5 * lambda * delta).exp();
        for (o, i) in out.iter().zip(incs) {
            assert!(((o - w * i) / w).abs() < 1e-12);
        }
        assert_eq!(out.len(), incs.len());
    }

    #[test]
    fn sigma_scales_pathwise() {
        let one = FouSpec::single(0.8, 2, 1.0, 0.7).unwrap();
        let two = one.with_sigma(2.0).unwrap();
        let a = simulate_fou(&SimulationPlan::new(one, 500, 0.05, 3).unwrap()).unwrap();
        let b = simulate_fou(&SimulationPlan::new(two, 500, 0.05, 3).unwrap()).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((2.0 * x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn plan_grid() {
        let spec = FouSpec::single(0.5, 1, 1.0, 0.5).unwrap();
        let plan = SimulationPlan::over_horizon(spec, 100.0, 1000, 1).unwrap();
        assert!((plan.delta() - 0.1).abs() < 1e-15);
        assert_eq!(plan.burn_in(), 40.0);
        assert_eq!(plan.burn_in_steps(), 400);
        assert_eq!(simulate_fou(&plan).unwrap().len(), 1000);
    }

    #[test]
    fn standardize_rejects_constant() {
        let p = Path::new(vec![0.1; 40], 1.0).unwrap();
        assert_eq!(path_standardize(&p), Err(Error::DegeneratePath));
    }

    #[test]
    fn standardize_moments_and_idempotence() {
        let p = Path::new((0..57).map(|i| ((i * 7919) % 23) as f64 * 0.37 - 2.0).collect(), 0.2).unwrap();
        let s = path_standardize(&p).unwrap();
        let n = s.len() as f64;
        let mean = s.values().iter().sum::<f64>() / n;
        let var = s.values().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-12);
        let again = path_standardize(&s).unwrap();
        for (a, b) in s.values().iter().zip(again.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let c = again.standardization().unwrap();
        for (raw, z) in p.values().iter().zip(again.values()) {
            assert!((c.to_raw(*z) - raw).abs() < 1e-12);
        }
    }
}
