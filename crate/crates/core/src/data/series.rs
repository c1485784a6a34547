//! Series and point types plus zero-mean normalization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single timestamped KPI sample, optionally carrying a ground-truth label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimePoint {
    /// Epoch seconds.
    pub timestamp: i64,
    pub value: f64,
    /// `Some(true)` marks a known anomaly.
    pub label: Option<bool>,
}

/// An ordered sequence of samples for one KPI.
///
/// Timestamps are strictly increasing and consecutive gaps are integer
/// multiples of `interval`. Gaps are allowed; values are never imputed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub id: String,
    pub points: Vec<TimePoint>,
    /// Base sampling interval in seconds.
    pub interval: i64,
}

/// Parameters of the zero-mean normalization `x' = (x - mu) / sigma`,
/// kept for the inverse mapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub mu: f64,
    pub sigma: f64,
}

impl Series {
    /// Build a series, validating ordering, spacing, and finiteness.
    pub fn new(id: impl Into<String>, points: Vec<TimePoint>, interval: i64) -> Result<Self> {
        let id = id.into();
        if points.is_empty() {
            return Err(Error::EmptySeries);
        }
        if interval <= 0 {
            return Err(Error::InvalidParameter(format!(
                "interval must be positive, got {interval}"
            )));
        }
        for pair in points.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b.timestamp == a.timestamp {
                return Err(Error::DuplicateTimestamp {
                    id,
                    timestamp: a.timestamp,
                });
            }
            if b.timestamp < a.timestamp {
                return Err(Error::OutOfOrderTimestamp {
                    got: b.timestamp,
                    last: a.timestamp,
                });
            }
            let gap = b.timestamp - a.timestamp;
            if gap % interval != 0 {
                return Err(Error::IrregularSpacing {
                    id,
                    timestamp: b.timestamp,
                    gap,
                    interval,
                });
            }
        }
        if let Some(p) = points.iter().find(|p| !p.value.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite value at timestamp {}",
                p.timestamp
            )));
        }
        Ok(Series {
            id,
            points,
            interval,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Values in timestamp order.
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// Sub-series over a point-index range; keeps id and interval.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Series> {
        let points = self
            .points
            .get(range)
            .ok_or_else(|| Error::InvalidParameter("slice range out of bounds".into()))?
            .to_vec();
        Series::new(self.id.clone(), points, self.interval)
    }

    /// Indices of points labelled anomalous.
    pub fn labeled_indices(&self) -> Vec<usize> {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.label == Some(true))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Population mean and standard deviation (divide by n).
///
/// The population convention makes `normalize` exact: the output has mean 0
/// and standard deviation 1 under the same convention.
pub(crate) fn population_mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Zero-mean normalization: `x' = (x - mu) / sigma` with the population
/// standard deviation. Fails on constant input or fewer than two points.
pub fn normalize(series: &Series) -> Result<(Series, NormalizationParams)> {
    if series.len() < 2 {
        return Err(Error::InsufficientData(
            "normalization needs at least 2 points".into(),
        ));
    }
    let values = series.values();
    let (mu, sigma) = population_mean_std(&values);
    if sigma == 0.0 || !sigma.is_finite() {
        return Err(Error::ConstantSeries);
    }
    let points = series
        .points
        .iter()
        .map(|p| TimePoint {
            timestamp: p.timestamp,
            value: (p.value - mu) / sigma,
            label: p.label,
        })
        .collect();
    let normalized = Series {
        id: series.id.clone(),
        points,
        interval: series.interval,
    };
    Ok((normalized, NormalizationParams { mu, sigma }))
}

/// Inverse of [`normalize`]: `x = x' * sigma + mu`.
pub fn denormalize(series: &Series, params: &NormalizationParams) -> Result<Series> {
    if !(params.sigma > 0.0) || !params.sigma.is_finite() || !params.mu.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "invalid normalization params mu={} sigma={}",
            params.mu, params.sigma
        )));
    }
    let points = series
        .points
        .iter()
        .map(|p| TimePoint {
            timestamp: p.timestamp,
            value: p.value * params.sigma + params.mu,
            label: p.label,
        })
        .collect();
    Ok(Series {
        id: series.id.clone(),
        points,
        interval: series.interval,
    })
}
