use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Affine constants removed by standardization: `raw = mean + sd * standardized`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: f64,
    pub sd: f64,
}

impl Standardization {
    pub fn to_raw(&self, standardized: f64) -> f64 {
        self.mean + self.sd * standardized
    }
}

/// Equispaced sample `X_Δ, X_2Δ, …, X_nΔ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    values: Vec<f64>,
    delta: f64,
    standardization: Option<Standardization>,
}

impl Path {
    pub fn new(values: Vec<f64>, delta: f64) -> Result<Self> {
        ensure(delta.is_finite() && delta > 0.0, || format!("delta must be positive, got {delta}"))?;
        ensure(values.iter().all(|v| v.is_finite()), || "path values must be finite".into())?;
        Ok(Self {
            values,
            delta,
            standardization: None,
        })
    }

    pub(crate) fn with_standardization(mut self, s: Standardization) -> Self {
        self.standardization = Some(s);
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Horizon `T = n Δ`.
    pub fn horizon(&self) -> f64 {
        self.values.len() as f64 * self.delta
    }

    /// Constants recorded by [`crate::simulate::path_standardize`], if applied.
    pub fn standardization(&self) -> Option<Standardization> {
        self.standardization
    }

    /// Same grid, values mapped through `f`. Standardization metadata is dropped.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Path {
        Path {
            values: self.values.iter().map(|&v| f(v)).collect(),
            delta: self.delta,
            standardization: None,
        }
    }
}
