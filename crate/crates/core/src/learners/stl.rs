//! Seasonal-trend decomposition with Loess smoothing, plus the streaming
//! forecaster built on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::loess::loess_smooth;

/// How the trend component is carried forward when forecasting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TrendExtrapolation {
    /// Hold the last defined trend value.
    #[default]
    Last,
    /// Extend the last local slope of the trend.
    Slope,
}

/// Additive decomposition `y = trend + seasonal + residual`.
///
/// All three components have the input's length. The seasonal component is
/// one period of phase means tiled across the series, centered to sum to
/// zero over a period. The trend is a centered moving average (applied
/// twice for even windows, once for odd) and is extended into the first and
/// last `trend_margin` points by its nearest defined value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StlDecomposition {
    pub trend: Vec<f64>,
    pub seasonal: Vec<f64>,
    pub residual: Vec<f64>,
    pub period: usize,
    pub trend_window: usize,
    pub trend_margin: usize,
}

/// Centered moving average of window `m`; even windows are smoothed twice
/// (an m-average followed by a 2-average) so the result stays centered.
/// Returns the averaged values and the undefined edge width per side.
fn centered_moving_average(x: &[f64], m: usize) -> (Vec<f64>, usize) {
    let n = x.len();
    if m % 2 == 1 {
        let h = (m - 1) / 2;
        let mut t = vec![0.0; n];
        for i in h..n - h {
            t[i] = x[i - h..=i + h].iter().sum::<f64>() / m as f64;
        }
        (t, h)
    } else {
        let h = m / 2;
        let mut first = vec![0.0; n - m + 1];
        for j in 0..=n - m {
            first[j] = x[j..j + m].iter().sum::<f64>() / m as f64;
        }
        let mut t = vec![0.0; n];
        for i in h..n - h {
            t[i] = 0.5 * (first[i - h] + first[i - h + 1]);
        }
        (t, h)
    }
}

/// Decompose `x` into trend, seasonal, and residual components.
///
/// The detrended series is reshaped into cycle-subseries (one per phase),
/// each smoothed by degree-1 Loess across periods before the phase mean is
/// taken; this keeps the seasonal estimate robust to isolated outliers.
pub fn stl_decompose(x: &[f64], period: usize, trend_window: usize) -> Result<StlDecomposition> {
    let n = x.len();
    if period < 2 {
        return Err(Error::InvalidParameter(format!(
            "period must be at least 2, got {period}"
        )));
    }
    if n < 2 * period {
        return Err(Error::InsufficientData(format!(
            "need at least two periods ({} points), got {n}",
            2 * period
        )));
    }
    if trend_window < 2 || trend_window > n {
        return Err(Error::InvalidParameter(format!(
            "trend window {trend_window} out of range for length {n}"
        )));
    }

    let (mut trend, margin) = centered_moving_average(x, trend_window);
    if n <= 2 * margin {
        return Err(Error::InvalidParameter(format!(
            "trend window {trend_window} leaves no interior points"
        )));
    }
    for i in 0..margin {
        trend[i] = trend[margin];
        trend[n - 1 - i] = trend[n - 1 - margin];
    }

    let detrended: Vec<f64> = x.iter().zip(&trend).map(|(v, t)| v - t).collect();

    // Phase means of the Loess-smoothed cycle-subseries.
    let mut phase_means = Vec::with_capacity(period);
    for phase in 0..period {
        let sub: Vec<f64> = detrended
            .iter()
            .skip(phase)
            .step_by(period)
            .cloned()
            .collect();
        let span = sub.len().min(period.div_ceil(2)).max(2).min(sub.len());
        let smoothed = loess_smooth(&sub, span, 1)?;
        phase_means.push(smoothed.iter().sum::<f64>() / smoothed.len() as f64);
    }
    let grand = phase_means.iter().sum::<f64>() / period as f64;
    for v in phase_means.iter_mut() {
        *v -= grand;
    }

    let seasonal: Vec<f64> = (0..n).map(|i| phase_means[i % period]).collect();
    let residual: Vec<f64> = (0..n).map(|i| x[i] - trend[i] - seasonal[i]).collect();

    Ok(StlDecomposition {
        trend,
        seasonal,
        residual,
        period,
        trend_window,
        trend_margin: margin,
    })
}

impl StlDecomposition {
    pub fn len(&self) -> usize {
        self.trend.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trend.is_empty()
    }

    /// Last trend value that was actually computed (not edge-extended).
    pub fn last_defined_trend(&self) -> f64 {
        self.trend[self.len() - 1 - self.trend_margin]
    }

    /// Per-step slope at the end of the defined trend region.
    pub fn last_trend_slope(&self) -> f64 {
        let last = self.len() - 1 - self.trend_margin;
        if last == 0 {
            0.0
        } else {
            self.trend[last] - self.trend[last - 1]
        }
    }

    /// Seasonal value for an arbitrary (possibly future) index.
    pub fn seasonal_at(&self, index: usize) -> f64 {
        self.seasonal[index % self.period]
    }
}

/// One-step forecast from a decomposition of `history`: last defined trend
/// plus the seasonal value at the next phase.
pub fn stl_predict_next(decomp: &StlDecomposition, history: &[f64]) -> Result<f64> {
    if decomp.is_empty() {
        return Err(Error::EmptySeries);
    }
    if decomp.len() != history.len() {
        return Err(Error::InvalidParameter(format!(
            "decomposition length {} does not cover history length {}",
            decomp.len(),
            history.len()
        )));
    }
    Ok(decomp.last_defined_trend() + decomp.seasonal_at(history.len()))
}

/// Streaming STL forecaster: O(1) phase lookup per point with a periodic
/// re-decomposition over a sliding buffer of recent values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StlState {
    period: usize,
    trend_window: usize,
    refresh_every: u64,
    extrapolation: TrendExtrapolation,
    /// Seasonal value per global phase (`global_index % period`).
    seasonal: Vec<f64>,
    trend_level: f64,
    trend_slope: f64,
    steps_since_refresh: u64,
}

impl StlState {
    /// Fit on training values that start at global index `global_start`.
    pub fn fit(
        values: &[f64],
        global_start: u64,
        period: usize,
        trend_window: usize,
        refresh_every: u64,
        extrapolation: TrendExtrapolation,
    ) -> Result<Self> {
        let decomp = stl_decompose(values, period, trend_window)?;
        Ok(Self::from_decomposition(
            &decomp,
            global_start,
            refresh_every,
            extrapolation,
        ))
    }

    /// Build the state from an existing decomposition of values starting at
    /// `global_start`.
    pub fn from_decomposition(
        decomp: &StlDecomposition,
        global_start: u64,
        refresh_every: u64,
        extrapolation: TrendExtrapolation,
    ) -> Self {
        let mut state = StlState {
            period: decomp.period,
            trend_window: decomp.trend_window,
            refresh_every: refresh_every.max(1),
            extrapolation,
            seasonal: vec![0.0; decomp.period],
            trend_level: 0.0,
            trend_slope: 0.0,
            steps_since_refresh: 0,
        };
        state.absorb(decomp, global_start);
        state
    }

    fn absorb(&mut self, decomp: &StlDecomposition, global_start: u64) {
        for local in 0..self.period {
            let phase = (global_start as usize + local) % self.period;
            self.seasonal[phase] = decomp.seasonal[local];
        }
        self.trend_level = decomp.last_defined_trend();
        self.trend_slope = decomp.last_trend_slope();
        self.steps_since_refresh = 0;
    }

    /// In-sample one-step prediction at a training index.
    pub fn in_sample_prediction(decomp: &StlDecomposition, index: usize) -> f64 {
        decomp.trend[index] + decomp.seasonal[index]
    }

    /// Forecast for the point at `global_index`.
    pub fn predict(&self, global_index: u64) -> f64 {
        let trend = match self.extrapolation {
            TrendExtrapolation::Last => self.trend_level,
            TrendExtrapolation::Slope => {
                self.trend_level + self.trend_slope * (self.steps_since_refresh + 1) as f64
            }
        };
        trend + self.seasonal[(global_index as usize) % self.period]
    }

    /// Advance one observed point, reporting whether a refresh is due.
    pub fn advance(&mut self) -> bool {
        self.steps_since_refresh += 1;
        self.steps_since_refresh >= self.refresh_every
    }

    /// Re-decompose from `recent`, which must end just before
    /// `next_global_index`. No-op when `recent` is still too short.
    pub fn refresh(&mut self, recent: &[f64], next_global_index: u64) -> Result<()> {
        if recent.len() < 2 * self.period {
            return Ok(());
        }
        let window = self.trend_window.min(recent.len());
        let decomp = stl_decompose(recent, self.period, window)?;
        let global_start = next_global_index - recent.len() as u64;
        self.absorb(&decomp, global_start);
        Ok(())
    }

    /// Advance one observed point; re-decompose from `recent` when due.
    /// `next_global_index` is the global index one past the observed point.
    pub fn observe(&mut self, recent: &[f64], next_global_index: u64) -> Result<()> {
        if self.advance() {
            self.refresh(recent, next_global_index)?;
        }
        Ok(())
    }

    pub fn period(&self) -> usize {
        self.period
    }
}
