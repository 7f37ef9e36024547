use serde::Serialize;

use crate::error::{Error, Result};

/// Order statistics and moments of a sample. Quantiles interpolate
/// linearly between order statistics at position `(count − 1)·q`; `std` is
/// the sample standard deviation (`count − 1` denominator, 0 for one
/// value) and `ci95_halfwidth` is `1.96·std/√count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStats {
    pub count: f64,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub q05: f64,
    pub q95: f64,
    pub ci95_halfwidth: f64,
}

pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(values: &[f64]) -> Result<SummaryStats> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("cannot summarize an empty sample".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    let std = var.sqrt();
    Ok(SummaryStats {
        count: n,
        mean,
        std,
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        median: quantile_sorted(&sorted, 0.5),
        q05: quantile_sorted(&sorted, 0.05),
        q95: quantile_sorted(&sorted, 0.95),
        ci95_halfwidth: 1.96 * std / n.sqrt(),
    })
}

/// Binomial standard error of a frequency estimated from `trials` draws.
pub fn binomial_se(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials.max(1) as f64).sqrt()
}
