//! Descriptive statistics over a series.

use serde::{Deserialize, Serialize};

use crate::data::series::{population_mean_std, Series};
use crate::error::{Error, Result};

/// Summary statistics: count, mean, population std, and the order
/// statistics min / 25% / 50% / 75% / max.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub max: f64,
}

/// Empirical quantile by linear interpolation between order statistics.
///
/// `sorted` must be ascending and non-empty; `level` in [0, 1].
pub fn quantile_sorted(sorted: &[f64], level: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let level = level.clamp(0.0, 1.0);
    let h = (sorted.len() - 1) as f64 * level;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < sorted.len() {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[lo]
    }
}

/// Compute [`SeriesStats`] for a non-empty series.
pub fn describe(series: &Series) -> Result<SeriesStats> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut sorted = series.values();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (mean, std) = population_mean_std(&sorted);
    Ok(SeriesStats {
        count: sorted.len(),
        mean,
        std,
        min: sorted[0],
        q25: quantile_sorted(&sorted, 0.25),
        q50: quantile_sorted(&sorted, 0.50),
        q75: quantile_sorted(&sorted, 0.75),
        max: *sorted.last().unwrap(),
    })
}
