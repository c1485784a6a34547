//! Forecast accuracy metrics.

use crate::error::{Error, Result};

/// Mean squared error and mean absolute error of a prediction sequence.
pub fn forecast_metrics(actual: &[f64], predicted: &[f64]) -> Result<(f64, f64)> {
    if actual.len() != predicted.len() {
        return Err(Error::InvalidParameter(format!(
            "length mismatch: {} actual vs {} predicted",
            actual.len(),
            predicted.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::EmptySeries);
    }
    let n = actual.len() as f64;
    let mut sq = 0.0;
    let mut abs = 0.0;
    for (a, p) in actual.iter().zip(predicted) {
        let r = a - p;
        sq += r * r;
        abs += r.abs();
    }
    Ok((sq / n, abs / n))
}
