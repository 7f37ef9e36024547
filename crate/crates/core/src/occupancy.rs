//! Balls into bins: simulation, expected-count bounds for empty and
//! singleton bins, and the Azuma tail bound.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BinCounts {
    pub n: u64,
    pub m: u64,
    pub counts: Vec<u32>,
}

impl BinCounts {
    pub fn empty_bins(&self) -> u64 {
        count_bins_with(0, self)
    }

    pub fn singleton_bins(&self) -> u64 {
        count_bins_with(1, self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OccupancyBounds {
    pub lower: f64,
    pub upper: f64,
}

impl OccupancyBounds {
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

/// Throws `n` balls into `m` bins independently and uniformly.
pub fn throw_balls(n: u64, m: u64, seed: u64) -> Result<BinCounts> {
    if n < 1 || m < 1 {
        return Err(Error::InvalidArgument(format!("throw_balls needs n ≥ 1 and m ≥ 1 (got n={n}, m={m})")));
    }
    let mut r = rng::from_seed(seed);
    let mut counts = vec![0u32; m as usize];
    for _ in 0..n {
        counts[r.gen_range(0..m) as usize] += 1;
    }
    Ok(BinCounts { n, m, counts })
}

pub fn count_bins_with(k: u32, bins: &BinCounts) -> u64 {
    bins.counts.iter().filter(|&&c| c == k).count() as u64
}

/// Bin count for `α = β / log n`: `max(1, round(β n / log n))`.
pub fn bins_for_beta(n: u64, beta: f64) -> u64 {
    let ln = (n as f64).ln();
    if ln <= 0.0 {
        return 1;
    }
    ((beta * n as f64 / ln).round() as u64).max(1)
}

fn check_bound_args(n: u64, beta: f64) -> Result<f64> {
    if !(beta >= 4.0) {
        return Err(Error::BetaTooSmall(beta));
    }
    let ln = (n as f64).ln();
    if ln <= beta {
        return Err(Error::LogGuard { n, beta });
    }
    Ok(ln)
}

/// `(β n^{1−1/β} / (2 log n), β n^{1−1/β} / log n)` for the number of empty bins.
pub fn expected_bounds_x0(n: u64, beta: f64) -> Result<OccupancyBounds> {
    let ln = check_bound_args(n, beta)?;
    let upper = beta * (n as f64).powf(1.0 - 1.0 / beta) / ln;
    Ok(OccupancyBounds { lower: upper / 2.0, upper })
}

/// `(n^{1−1/β} / 2, 2 n^{1−1/β})` for the number of singleton bins.
pub fn expected_bounds_x1(n: u64, beta: f64) -> Result<OccupancyBounds> {
    check_bound_args(n, beta)?;
    let core = (n as f64).powf(1.0 - 1.0 / beta);
    Ok(OccupancyBounds { lower: core / 2.0, upper: 2.0 * core })
}

/// High-probability floor on singleton bins: `n^{1−1/β} / (4 log n)`.
pub fn singleton_floor(n: u64, beta: f64) -> Result<f64> {
    let ln = check_bound_args(n, beta)?;
    Ok((n as f64).powf(1.0 - 1.0 / beta) / (4.0 * ln))
}

/// `min(1, 2·exp(−λ² / (2 Σ cᵢ²)))`, the bound on `P(|Z_n − μ| > λ√n)`
/// for a martingale with increments bounded by `cᵢ`.
pub fn azuma_tail(lambda: f64, c: &[f64]) -> Result<f64> {
    if c.is_empty() {
        return Err(Error::InvalidArgument("azuma_tail needs at least one increment bound".into()));
    }
    if !(lambda > 0.0) || c.iter().any(|&ci| !(ci > 0.0)) {
        return Err(Error::InvalidArgument("azuma_tail needs λ > 0 and all cᵢ > 0".into()));
    }
    let sum_sq: f64 = c.iter().map(|ci| ci * ci).sum();
    Ok((2.0 * (-lambda * lambda / (2.0 * sum_sq)).exp()).min(1.0))
}
