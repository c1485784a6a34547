//! Synthetic sine dataset with Gaussian noise and injected anomalies.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::series::{Series, TimePoint};
use crate::error::{Error, Result};

/// Sampling interval of generated series, in seconds (1-minute KPIs).
pub const SYNTHETIC_INTERVAL: i64 = 60;

/// Generate `periods * period_len` points of a unit sine wave plus
/// `N(0, noise_sigma)` noise, with spikes of the given magnitudes injected
/// at the listed indices. Labels are true exactly at injected indices.
/// Deterministic for a fixed seed.
pub fn generate_synthetic(
    periods: usize,
    period_len: usize,
    noise_sigma: f64,
    anomaly_spec: &[(usize, f64)],
    seed: u64,
) -> Result<Series> {
    if periods < 1 {
        return Err(Error::InvalidParameter("periods must be >= 1".into()));
    }
    if period_len < 4 {
        return Err(Error::InvalidParameter("period_len must be >= 4".into()));
    }
    if !(noise_sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise_sigma must be non-negative, got {noise_sigma}"
        )));
    }
    let n = periods * period_len;
    for &(idx, _) in anomaly_spec {
        if idx >= n {
            return Err(Error::InvalidParameter(format!(
                "anomaly index {idx} out of range (series length {n})"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise_sigma.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let omega = 2.0 * std::f64::consts::PI / period_len as f64;

    let mut points = Vec::with_capacity(n);
    for t in 0..n {
        let noise = if noise_sigma > 0.0 {
            normal.sample(&mut rng)
        } else {
            0.0
        };
        points.push(TimePoint {
            timestamp: SYNTHETIC_INTERVAL * t as i64,
            value: (omega * t as f64).sin() + noise,
            label: Some(false),
        });
    }
    for &(idx, magnitude) in anomaly_spec {
        points[idx].value += magnitude;
        points[idx].label = Some(true);
    }
    Series::new("synthetic", points, SYNTHETIC_INTERVAL)
}
