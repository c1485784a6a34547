//! Peaks-over-threshold detector with online threshold re-estimation.
//!
//! Two thresholds are maintained: a peak threshold `t` selecting candidate
//! excesses and an alert threshold `z` above which points are anomalies.
//! Candidates update a GPD tail fit, from which `z` is re-derived so that
//! its fitted exceedance probability stays at the target `q`. Anomalous
//! points are routed to the anomaly set and never pollute the tail fit.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::data::quantile_sorted;
use crate::error::{Error, Result};
use crate::evt::fit::{gpd_fit_lme_hinted, LmeStatus};
use crate::evt::gpd::{GpdParams, SHAPE_EPS};

/// Detector configuration.
///
/// `q` is the target exceedance probability of the alert threshold (the
/// long-run false-alarm rate on clean data); the alert threshold starts at
/// the empirical `1 - q` quantile of the training errors. `theta` is the
/// quantile level of the peak threshold and must satisfy `theta < 1 - q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotConfig {
    pub q: f64,
    pub theta: f64,
    /// Below this many peaks the alert threshold stays at its empirical value.
    pub min_peaks: usize,
    /// FIFO capacity of the peak set, bounding streaming memory.
    pub max_peaks: usize,
    /// Re-derive `t` from a sliding window of recent errors instead of
    /// keeping it fixed at its initial quantile.
    pub sliding_t: bool,
    /// Window size (and refresh cadence driver) for the sliding-t variant.
    pub sliding_window: usize,
    /// Absolute floor for both thresholds. Errors at or below it are always
    /// normal; set to the input's numerical resolution so a degenerate
    /// (all-but-zero) training error distribution cannot alert on rounding
    /// dust.
    pub min_threshold: f64,
}

impl Default for PotConfig {
    fn default() -> Self {
        PotConfig {
            q: 0.01,
            theta: 0.95,
            min_peaks: 10,
            max_peaks: 10_000,
            sliding_t: false,
            sliding_window: 10_000,
            min_threshold: 0.0,
        }
    }
}

impl PotConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "q must be in (0, 1), got {}",
                self.q
            )));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "theta must be in (0, 1), got {}",
                self.theta
            )));
        }
        if self.theta >= 1.0 - self.q {
            return Err(Error::InvalidParameter(format!(
                "peak level theta = {} must lie below the alert level 1 - q = {}",
                self.theta,
                1.0 - self.q
            )));
        }
        if self.min_peaks < 2 {
            return Err(Error::InvalidParameter(
                "min_peaks must be at least 2".into(),
            ));
        }
        if self.max_peaks < self.min_peaks {
            return Err(Error::InvalidParameter(
                "max_peaks must be at least min_peaks".into(),
            ));
        }
        Ok(())
    }
}

/// Per-point classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Normal,
    Candidate,
    Anomaly,
}

/// GPD quantile level: the threshold whose fitted exceedance probability is
/// `q`, given `n` total observations and `n_t` stored peaks above `t`:
///
/// ```text
/// z = t + sigma/k * (1 - (q n / n_t)^k)        (k away from 0)
/// z = t - sigma * ln(q n / n_t)                (k -> 0 limit)
/// ```
pub fn pot_quantile(t: f64, params: &GpdParams, q: f64, n: u64, n_t: u64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "q must be in (0, 1), got {q}"
        )));
    }
    if n_t == 0 {
        return Err(Error::InvalidParameter("no peaks recorded".into()));
    }
    if n < n_t {
        return Err(Error::InvalidParameter(format!(
            "peak count {n_t} exceeds observation count {n}"
        )));
    }
    let ratio = q * n as f64 / n_t as f64;
    if params.k.abs() >= SHAPE_EPS {
        Ok(t + params.sigma / params.k * (1.0 - ratio.powf(params.k)))
    } else {
        Ok(t - params.sigma * ratio.ln())
    }
}

/// Live detector state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotState {
    config: PotConfig,
    /// Peak threshold.
    t: f64,
    /// Alert threshold.
    z: f64,
    /// Candidate excesses over `t`, kept for the tail fit (FIFO once at
    /// capacity).
    peaks: VecDeque<f64>,
    /// Total peaks observed; the exceedance ratio `N_t / n` uses this, not
    /// the bounded store.
    peaks_seen: u64,
    /// Flagged anomalies as (index, error).
    anomalies: Vec<(u64, f64)>,
    /// Total observations seen, training included.
    n: u64,
    gpd: Option<GpdParams>,
    /// Warm start for streaming refits.
    lme_hint: Option<f64>,
    /// True when the last fit fell back to moment estimates.
    moment_fallback: bool,
    /// Recent errors, kept only for the sliding-t variant.
    recent: VecDeque<f64>,
    steps_since_slide: u64,
}

impl PotState {
    /// Initialize from training errors: `z` at the empirical `1 - q`
    /// quantile, `t` at the `theta` quantile, peaks collected above `t`,
    /// and `z` re-derived from a GPD fit once enough peaks exist.
    pub fn init(train_errors: &[f64], config: PotConfig) -> Result<Self> {
        config.validate()?;
        if train_errors.len() < 30 {
            return Err(Error::InsufficientData(format!(
                "detector initialization needs at least 30 training errors, got {}",
                train_errors.len()
            )));
        }
        if train_errors.iter().any(|e| !e.is_finite()) {
            return Err(Error::Numeric("non-finite training error".into()));
        }
        let mut sorted = train_errors.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let z = quantile_sorted(&sorted, 1.0 - config.q).max(config.min_threshold);
        let t = quantile_sorted(&sorted, config.theta).max(config.min_threshold);

        let mut state = PotState {
            config,
            t,
            z: z.max(t),
            peaks: VecDeque::new(),
            peaks_seen: 0,
            anomalies: Vec::new(),
            n: train_errors.len() as u64,
            gpd: None,
            lme_hint: None,
            moment_fallback: false,
            recent: VecDeque::new(),
            steps_since_slide: 0,
        };
        for &e in train_errors {
            if e > t {
                state.push_peak(e - t);
                state.peaks_seen += 1;
            }
            if config.sliding_t {
                state.push_recent(e);
            }
        }
        state.refit();
        Ok(state)
    }

    fn push_peak(&mut self, excess: f64) {
        if self.peaks.len() == self.config.max_peaks {
            self.peaks.pop_front();
        }
        self.peaks.push_back(excess);
    }

    fn push_recent(&mut self, e: f64) {
        if self.recent.len() == self.config.sliding_window {
            self.recent.pop_front();
        }
        self.recent.push_back(e);
    }

    /// Observation and peak counts behind the exceedance ratio: totals for
    /// the fixed-t detector, window counts for the sliding variant.
    fn ratio_counts(&self) -> (u64, u64) {
        if self.config.sliding_t {
            (self.recent.len() as u64, self.peaks_seen)
        } else {
            (self.n, self.peaks_seen)
        }
    }

    /// Refit the tail and re-derive `z`; keeps the previous fit when the
    /// peak set is degenerate.
    fn refit(&mut self) {
        if self.peaks.len() < self.config.min_peaks {
            return;
        }
        let xs: Vec<f64> = self.peaks.iter().cloned().collect();
        match gpd_fit_lme_hinted(&xs, self.lme_hint) {
            Ok(fit) => {
                self.moment_fallback = fit.status == LmeStatus::MomentFallback;
                self.lme_hint = match fit.status {
                    LmeStatus::Converged => Some(fit.params.b()),
                    LmeStatus::MomentFallback => None,
                };
                let (n, n_t) = self.ratio_counts();
                if let Ok(zq) = pot_quantile(self.t, &fit.params, self.config.q, n, n_t) {
                    if zq.is_finite() {
                        self.gpd = Some(fit.params);
                        self.z = zq.max(self.t);
                    }
                }
            }
            Err(_) => {
                // e.g. all stored peaks equal; keep the current thresholds
                self.moment_fallback = true;
            }
        }
    }

    /// Re-derive `t` from the sliding window and rebuild the peak set.
    fn slide_t(&mut self) {
        let mut sorted: Vec<f64> = self.recent.iter().cloned().collect();
        if sorted.len() < 30 {
            return;
        }
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let t = quantile_sorted(&sorted, self.config.theta).max(self.config.min_threshold);
        self.t = t;
        self.peaks.clear();
        self.peaks_seen = 0;
        let recent: Vec<f64> = self.recent.iter().cloned().collect();
        for e in recent {
            if e > t {
                self.push_peak(e - t);
                self.peaks_seen += 1;
            }
        }
        self.z = self.z.max(self.t);
        self.refit();
    }

    /// Classify one error and update the detector.
    ///
    /// Anomalies (`e > z`) are recorded but leave the tail fit untouched;
    /// candidates (`t < e <= z`) extend the peak set and trigger a refit;
    /// everything else only advances the observation count.
    pub fn step(&mut self, e: f64, index: u64) -> Result<Verdict> {
        if !e.is_finite() {
            return Err(Error::Numeric(format!("non-finite error {e} at {index}")));
        }
        self.n += 1;
        if self.config.sliding_t {
            self.push_recent(e);
            self.steps_since_slide += 1;
            if self.steps_since_slide >= (self.config.sliding_window as u64 / 10).max(1) {
                self.steps_since_slide = 0;
                self.slide_t();
            }
        }
        if e > self.z {
            self.anomalies.push((index, e));
            return Ok(Verdict::Anomaly);
        }
        if e > self.t {
            self.push_peak(e - self.t);
            self.peaks_seen += 1;
            self.refit();
            return Ok(Verdict::Candidate);
        }
        Ok(Verdict::Normal)
    }

    pub fn thresholds(&self) -> (f64, f64) {
        (self.t, self.z)
    }

    pub fn peak_count(&self) -> usize {
        self.peaks.len()
    }

    pub fn observation_count(&self) -> u64 {
        self.n
    }

    pub fn anomalies(&self) -> &[(u64, f64)] {
        &self.anomalies
    }

    pub fn gpd(&self) -> Option<&GpdParams> {
        self.gpd.as_ref()
    }

    pub fn used_moment_fallback(&self) -> bool {
        self.moment_fallback
    }
}
