//! Exact fractional Gaussian noise by circulant embedding (Davies–Harte).

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use crate::error::{ensure, Error, Result};
use crate::path::Path;
use crate::rng::{self, Rng};

/// Relative size of negative circulant eigenvalues that is treated as round-off.
pub const EIGENVALUE_CLAMP: f64 = 1e-9;

/// Size, Hurst index and seed of a unit-spacing fGn draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FgnGrid {
    n: usize,
    hurst: f64,
    seed: u64,
}

impl FgnGrid {
    pub fn new(n: usize, hurst: f64, seed: u64) -> Result<Self> {
        ensure(n >= 2, || format!("fGn grid needs n >= 2, got {n}"))?;
        check_hurst(hurst)?;
        Ok(Self { n, hurst, seed })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

pub(crate) fn check_hurst(hurst: f64) -> Result<()> {
    ensure(hurst > 0.0 && hurst < 1.0, || format!("hurst must lie in (0, 1), got {hurst}"))
}

/// Autocovariance of unit-spacing fGn:
/// `γ(k) = ½(|k+1|^{2H} + |k-1|^{2H} - 2|k|^{2H})`.
pub fn fgn_autocovariance(hurst: f64, lag: usize) -> f64 {
    if lag == 0 {
        return 1.0;
    }
    let k = lag as f64;
    let h2 = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(h2) + (k - 1.0).powf(h2) - 2.0 * k.powf(h2))
}

/// Eigenvalues of the minimal power-of-two circulant embedding of the first
/// `n` fGn autocovariances. Small negative values are clamped to zero.
pub fn circulant_eigenvalues(n: usize, hurst: f64) -> Result<Vec<f64>> {
    let m = n.saturating_sub(1).next_power_of_two();
    let size = 2 * m;
    let mut row: Vec<Complex64> = (0..size)
        .map(|k| {
            let lag = if k <= m { k } else { size - k };
            Complex64::new(fgn_autocovariance(hurst, lag), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(size).process(&mut row);
    let eig: Vec<f64> = row.iter().map(|c| c.re).collect();
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -EIGENVALUE_CLAMP * max {
        return Err(Error::CirculantNotPsd {
            min_eigenvalue: min,
            max_eigenvalue: max,
        });
    }
    Ok(eig.into_iter().map(|e| e.max(0.0)).collect())
}

/// Draw `n` unit-spacing fGn values from `rng`.
pub(crate) fn fgn_from_rng(n: usize, hurst: f64, rng: &mut Rng) -> Result<Vec<f64>> {
    let eig = circulant_eigenvalues(n, hurst)?;
    let size = eig.len();
    let scale = 1.0 / size as f64;
    let mut w: Vec<Complex64> = eig
        .iter()
        .map(|&e| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * (e * scale).sqrt()
        })
        .collect();
    FftPlanner::new().plan_fft_forward(size).process(&mut w);
    Ok(w.iter().take(n).map(|c| c.re).collect())
}

/// One draw of unit-spacing fractional Gaussian noise.
pub fn simulate_fgn(grid: &FgnGrid) -> Result<Vec<f64>> {
    let mut rng = rng::from_seed(grid.seed);
    fgn_from_rng(grid.n, grid.hurst, &mut rng)
}

/// Fractional Brownian motion `σ B_H` on `0, Δ, …, nΔ` (n+1 values, first is 0).
pub fn simulate_fbm(n: usize, delta: f64, sigma: f64, hurst: f64, seed: u64) -> Result<Path> {
    ensure(n >= 1, || "fBm needs at least one increment".into())?;
    ensure(delta > 0.0 && delta.is_finite(), || format!("delta must be positive, got {delta}"))?;
    ensure(sigma > 0.0 && sigma.is_finite(), || format!("sigma must be positive, got {sigma}"))?;
    check_hurst(hurst)?;
    let mut rng = rng::from_seed(seed);
    let noise = fgn_from_rng(n, hurst, &mut rng)?;
    let step = sigma * delta.powf(hurst);
    let mut values = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    values.push(0.0);
    for z in noise {
        acc += step * z;
        values.push(acc);
    }
    Path::new(values, delta)
}
