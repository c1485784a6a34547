//! The detection pipeline: normalization, fitted learners, per-learner
//! error streams, POT detectors, and the voting rule. Batch detection and
//! streaming share one per-point step, so their outputs are identical by
//! construction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{normalize, NormalizationParams, Series, TimePoint};
use crate::ensemble::config::{EnsembleConfig, LearnerKind, VoteMode};
use crate::ensemble::detection::{Detection, LearnerReport, ThresholdPair};
use crate::error::{Error, Result};
use crate::evt::{PotState, Verdict};
use crate::learners::{
    arima_fit, lstsvr_predict, stl_decompose, ArimaState, LstsvrState, StlState,
};

const CHECKPOINT_VERSION: u32 = 1;

/// Key under which the shared error-average detector reports thresholds.
pub const SHARED_DETECTOR_KEY: &str = "ensemble";

/// A fitted, streamable detection pipeline for one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsemblePipeline {
    config: EnsembleConfig,
    norm: Option<NormalizationParams>,
    interval: i64,
    last_timestamp: i64,
    next_index: u64,
    /// Recent values on the learners' (normalized) scale.
    history: Vec<f64>,
    history_cap: usize,
    arima: Option<ArimaState>,
    stl: Option<StlState>,
    lstsvr: Option<LstsvrState>,
    /// Per-learner detectors (majority mode).
    detectors: BTreeMap<String, PotState>,
    /// Shared detector (error-average mode).
    shared: Option<PotState>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointDoc {
    schema_version: u32,
    pipeline: EnsemblePipeline,
}

/// Contiguous runs of a point sequence: (index on the timestamp grid of the
/// first point, values). Gaps are multiples of the interval by the series
/// invariant.
fn contiguous_segments(
    points: &[TimePoint],
    values: &[f64],
    interval: i64,
) -> Vec<(u64, Vec<f64>)> {
    let t0 = points[0].timestamp;
    let mut segments: Vec<(u64, Vec<f64>)> = Vec::new();
    let mut prev_ts = t0 - interval;
    for (p, &v) in points.iter().zip(values) {
        let grid_index = ((p.timestamp - t0) / interval) as u64;
        if p.timestamp != prev_ts + interval || segments.is_empty() {
            segments.push((grid_index, Vec::new()));
        }
        segments.last_mut().unwrap().1.push(v);
        prev_ts = p.timestamp;
    }
    segments
}

/// Fit every enabled learner on the training series, derive in-sample
/// one-step errors, and initialize the detectors from them.
///
/// Learner windows never span a gap: models and detector training errors
/// come from the longest contiguous segment, and any training points after
/// it are then streamed through the normal per-point path (re-warming
/// across gaps). A gap-free series is a single segment with no tail.
pub fn fit(train: &Series, config: EnsembleConfig) -> Result<EnsemblePipeline> {
    config.validate()?;

    let mut config = config;
    let (all_values, norm) = if config.normalize_input {
        let (s, p) = normalize(train)?;
        (s.values(), Some(p))
    } else {
        (train.values(), None)
    };
    let sigma = norm.map_or(1.0, |p| p.sigma);

    let segments = contiguous_segments(&train.points, &all_values, train.interval);
    let (seg_start, values) = segments
        .iter()
        .max_by_key(|(_, v)| v.len())
        .map(|(s, v)| (*s, v.clone()))
        .expect("series is non-empty");
    let needed = config.min_train_len();
    if values.len() < needed {
        return Err(Error::InsufficientData(format!(
            "longest contiguous training segment has {} points; {needed} are required",
            values.len()
        )));
    }
    // points the fitted pipeline still has to consume as a stream
    let seg_end_ts =
        train.points[0].timestamp + (seg_start as i64 + values.len() as i64 - 1) * train.interval;
    let tail_from = train.points.partition_point(|p| p.timestamp <= seg_end_ts);

    // Threshold resolution floor: one-step errors below the numerical
    // resolution of the data are rounding dust, not evidence. Keyed to the
    // raw-scale spread so noise-free inputs cannot alert on it.
    let spread = if let Some(p) = &norm {
        p.sigma
    } else {
        let raw = train.values();
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        (raw.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / raw.len() as f64).sqrt()
    };
    config.pot.min_threshold = config
        .pot
        .min_threshold
        .max(1e-9 * spread.max(f64::MIN_POSITIVE));

    // Per-learner states plus in-sample absolute errors on the original
    // scale, each paired with the training index its errors start at.
    let mut arima = None;
    let mut stl = None;
    let mut lstsvr = None;
    let mut error_streams: Vec<(LearnerKind, usize, Vec<f64>)> = Vec::new();

    // In-sample residuals understate one-step forecast error by the usual
    // degrees-of-freedom ratio; detector training errors are rescaled from
    // residual scale to forecast scale, sqrt((1 + k/n) / (1 - k/n)) for a
    // model with k effective parameters fitted on n points.
    let forecast_scale = |k: f64, n: f64| {
        if n > 2.0 * k && k > 0.0 {
            ((1.0 + k / n) / (1.0 - k / n)).sqrt()
        } else {
            1.0
        }
    };

    for kind in &config.learners {
        match kind {
            LearnerKind::Arima => {
                let a = &config.arima;
                let model = arima_fit(&values, a.p, a.d, a.q)
                    .map_err(|e| Error::for_learner("arima", e))?;
                let start = model.d + model.p;
                let (state, errs) = ArimaState::fit_replay(model, &values);
                let scale = sigma * forecast_scale((a.p + a.q + 1) as f64, errs.len() as f64);
                error_streams.push((*kind, start, errs.iter().map(|e| e * scale).collect()));
                arima = Some(state);
            }
            LearnerKind::Stl => {
                let s = &config.stl;
                let decomp = stl_decompose(&values, s.period, s.trend_window())
                    .map_err(|e| Error::for_learner("stl", e))?;
                // each phase mean comes from one value per period
                let periods = (values.len() / s.period).max(1) as f64;
                let scale = sigma * forecast_scale(1.0, periods);
                let errs = decomp.residual.iter().map(|r| r.abs() * scale).collect();
                stl = Some(StlState::from_decomposition(
                    &decomp,
                    seg_start,
                    s.refresh_every(),
                    s.extrapolation,
                ));
                error_streams.push((*kind, 0, errs));
            }
            LearnerKind::Lstsvr => {
                let l = &config.lstsvr;
                let state = LstsvrState::fit(
                    &values,
                    config.window,
                    l.train_span,
                    l.refit_every,
                    l.kernel,
                    l.eps1,
                    l.eps2,
                    l.c1,
                    l.c2,
                )
                .map_err(|e| Error::for_learner("lstsvr", e))?;
                let mut errs = Vec::with_capacity(values.len() - config.window);
                for t in config.window..values.len() {
                    let pred = lstsvr_predict(&state.model, &values[t - config.window..t])
                        .map_err(|e| Error::for_learner("lstsvr", e))?;
                    errs.push((values[t] - pred).abs());
                }
                let rows = l.train_span.min(values.len()).saturating_sub(config.window);
                let scale = sigma * forecast_scale((config.window + 1) as f64, rows as f64);
                for e in errs.iter_mut() {
                    *e *= scale;
                }
                error_streams.push((*kind, config.window, errs));
                lstsvr = Some(state);
            }
        }
    }

    let mut detectors = BTreeMap::new();
    let mut shared = None;
    match config.vote_mode {
        VoteMode::Majority => {
            for (kind, _, errs) in &error_streams {
                let state = PotState::init(errs, config.pot)
                    .map_err(|e| Error::for_learner(kind.name(), e))?;
                detectors.insert(kind.name().to_string(), state);
            }
        }
        VoteMode::ErrorAverage => {
            let common = error_streams.iter().map(|(_, s, _)| *s).max().unwrap_or(0);
            let len = values.len();
            let mut mean_errs = Vec::with_capacity(len - common);
            for t in common..len {
                let mut acc = 0.0;
                for (_, start, errs) in &error_streams {
                    acc += errs[t - start];
                }
                mean_errs.push(acc / error_streams.len() as f64);
            }
            shared = Some(PotState::init(&mean_errs, config.pot)?);
        }
    }

    let mut history_cap = config.window + 2;
    if config.has(LearnerKind::Arima) {
        let a = &config.arima;
        history_cap = history_cap.max(a.p + a.d + a.q + 2);
    }
    if config.has(LearnerKind::Stl) {
        history_cap = history_cap.max(4 * config.stl.period);
    }
    if config.has(LearnerKind::Lstsvr) {
        history_cap = history_cap.max(config.lstsvr.train_span + 1);
    }
    let keep = values.len().min(history_cap);
    let history = values[values.len() - keep..].to_vec();

    let mut pipeline = EnsemblePipeline {
        config,
        norm,
        interval: train.interval,
        last_timestamp: seg_end_ts,
        next_index: seg_start + values.len() as u64,
        history,
        history_cap,
        arima,
        stl,
        lstsvr,
        detectors,
        shared,
    };
    for point in &train.points[tail_from..] {
        pipeline.step(point.timestamp, point.value)?;
    }
    Ok(pipeline)
}

impl EnsemblePipeline {
    pub fn config(&self) -> &EnsembleConfig {
        &self.config
    }

    pub fn normalization(&self) -> Option<&NormalizationParams> {
        self.norm.as_ref()
    }

    pub fn interval(&self) -> i64 {
        self.interval
    }

    pub fn last_timestamp(&self) -> i64 {
        self.last_timestamp
    }

    /// Enabled learner names in configuration order.
    pub fn learner_names(&self) -> Vec<&'static str> {
        self.config.learners.iter().map(|k| k.name()).collect()
    }

    /// The POT detector behind a learner (or `"ensemble"` in error-average
    /// mode), for inspection.
    pub fn detector(&self, name: &str) -> Option<&PotState> {
        if name == SHARED_DETECTOR_KEY {
            self.shared.as_ref()
        } else {
            self.detectors.get(name)
        }
    }

    fn to_internal(&self, raw: f64) -> f64 {
        match &self.norm {
            Some(p) => (raw - p.mu) / p.sigma,
            None => raw,
        }
    }

    fn to_external(&self, v: f64) -> f64 {
        match &self.norm {
            Some(p) => v * p.sigma + p.mu,
            None => v,
        }
    }

    /// True once every enabled learner can forecast from current history.
    fn ready(&self) -> bool {
        if self.history.len() < self.config.window {
            return false;
        }
        if let Some(a) = &self.arima {
            if !a.can_predict() {
                return false;
            }
        }
        if let Some(l) = &self.lstsvr {
            if !l.can_predict(self.history.len()) {
                return false;
            }
        }
        true
    }

    fn recent(&self, k: usize) -> &[f64] {
        &self.history[self.history.len().saturating_sub(k)..]
    }

    fn predict_internal(&self, kind: LearnerKind, index: u64) -> Result<f64> {
        match kind {
            LearnerKind::Arima => self
                .arima
                .as_ref()
                .expect("arima enabled")
                .predict()
                .map_err(|e| Error::for_learner("arima", e)),
            LearnerKind::Stl => Ok(self.stl.as_ref().expect("stl enabled").predict(index)),
            LearnerKind::Lstsvr => {
                let l = self.lstsvr.as_ref().expect("lstsvr enabled");
                l.predict(self.recent(l.window()))
                    .map_err(|e| Error::for_learner("lstsvr", e))
            }
        }
    }

    /// Process one point: forecast with every learner, run the detectors on
    /// the reconstruction errors, vote, then advance learner state with the
    /// observed value.
    fn step(&mut self, timestamp: i64, raw_value: f64) -> Result<Detection> {
        if !raw_value.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite value at timestamp {timestamp}"
            )));
        }
        let delta = timestamp - self.last_timestamp;
        if delta <= 0 {
            return Err(Error::OutOfOrderTimestamp {
                got: timestamp,
                last: self.last_timestamp,
            });
        }
        if delta % self.interval != 0 {
            return Err(Error::MisalignedTimestamp {
                got: timestamp,
                last: self.last_timestamp,
                interval: self.interval,
            });
        }
        let gap_steps = (delta / self.interval) as u64;
        if gap_steps > 1 {
            // Learner windows never span a gap: drop history and re-warm.
            self.history.clear();
            if let Some(a) = &mut self.arima {
                a.reset_history();
            }
            self.next_index += gap_steps - 1;
        }

        let index = self.next_index;
        let value = self.to_internal(raw_value);
        let warming = !self.ready();

        let mut learners = BTreeMap::new();
        let mut thresholds = BTreeMap::new();
        let mut ensemble = false;

        if !warming {
            let mut predictions = Vec::with_capacity(self.config.learners.len());
            for kind in &self.config.learners {
                predictions.push((*kind, self.predict_internal(*kind, index)?));
            }
            let mut votes = 0usize;
            let mut error_sum = 0.0;
            for (kind, pred_internal) in predictions {
                let name = kind.name();
                let prediction = self.to_external(pred_internal);
                let error = (raw_value - prediction).abs();
                let verdict = match self.config.vote_mode {
                    VoteMode::Majority => {
                        let det = self.detectors.get_mut(name).expect("detector per learner");
                        let (t, z) = det.thresholds();
                        thresholds.insert(name.to_string(), ThresholdPair { t, z });
                        let v = det.step(error, index)?;
                        if v == Verdict::Anomaly {
                            votes += 1;
                        }
                        v
                    }
                    VoteMode::ErrorAverage => {
                        error_sum += error;
                        Verdict::Normal
                    }
                };
                learners.insert(
                    name.to_string(),
                    LearnerReport {
                        prediction,
                        error,
                        verdict,
                    },
                );
            }
            ensemble = match self.config.vote_mode {
                VoteMode::Majority => votes >= self.config.vote_threshold,
                VoteMode::ErrorAverage => {
                    let mean = error_sum / self.config.learners.len() as f64;
                    let det = self.shared.as_mut().expect("shared detector");
                    let (t, z) = det.thresholds();
                    thresholds.insert(SHARED_DETECTOR_KEY.to_string(), ThresholdPair { t, z });
                    det.step(mean, index)? == Verdict::Anomaly
                }
            };
        }

        // Learners advance on the actual observation, never the forecast.
        self.history.push(value);
        if self.history.len() > 2 * self.history_cap {
            let drop = self.history.len() - self.history_cap;
            self.history.drain(..drop);
        }
        if let Some(a) = &mut self.arima {
            a.observe(value);
        }
        let stl_due = self.stl.as_mut().is_some_and(|s| s.advance());
        if stl_due {
            let slice = self.recent(self.history_cap).to_vec();
            self.stl
                .as_mut()
                .expect("stl enabled")
                .refresh(&slice, index + 1)
                .map_err(|e| Error::for_learner("stl", e))?;
        }
        let lstsvr_due = self.lstsvr.as_mut().is_some_and(|l| l.advance());
        if lstsvr_due {
            let slice = self.recent(self.history_cap).to_vec();
            self.lstsvr
                .as_mut()
                .expect("lstsvr enabled")
                .refit(&slice)
                .map_err(|e| Error::for_learner("lstsvr", e))?;
        }
        self.last_timestamp = timestamp;
        self.next_index = index + 1;

        Ok(Detection {
            index,
            timestamp,
            value: raw_value,
            warming,
            learners,
            ensemble,
            thresholds,
        })
    }

    /// Run the whole test series through the pipeline in order.
    pub fn detect_batch(&mut self, test: &Series) -> Result<Vec<Detection>> {
        if test.interval != self.interval {
            return Err(Error::IntervalMismatch {
                expected: self.interval,
                got: test.interval,
            });
        }
        test.points
            .iter()
            .map(|p| self.step(p.timestamp, p.value))
            .collect()
    }

    /// Process a single streamed point; identical semantics to one
    /// [`EnsemblePipeline::detect_batch`] iteration.
    pub fn stream_push(&mut self, point: TimePoint) -> Result<Detection> {
        self.step(point.timestamp, point.value)
    }

    /// Serialize the full pipeline state as a schema-versioned JSON document.
    pub fn checkpoint(&self) -> Result<String> {
        serde_json::to_string(&CheckpointDoc {
            schema_version: CHECKPOINT_VERSION,
            pipeline: self.clone(),
        })
        .map_err(|e| Error::Checkpoint(e.to_string()))
    }

    /// Rebuild a pipeline from [`EnsemblePipeline::checkpoint`] output.
    pub fn restore(doc: &str) -> Result<Self> {
        let parsed: CheckpointDoc = serde_json::from_str(doc)
            .map_err(|e| Error::Checkpoint(format!("corrupt document: {e}")))?;
        if parsed.schema_version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported schema version {} (expected {CHECKPOINT_VERSION})",
                parsed.schema_version
            )));
        }
        Ok(parsed.pipeline)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_synthetic;
    use crate::ensemble::config::{ArimaConfig, LstsvrConfig, StlConfig};
    use crate::evt::PotConfig;

    /// Small, fast configuration used across the pipeline tests.
    fn small_config(period: usize) -> EnsembleConfig {
        EnsembleConfig {
            window: 16,
            stl: StlConfig {
                period,
                ..Default::default()
            },
            lstsvr: LstsvrConfig {
                train_span: 200,
                refit_every: 128,
                ..Default::default()
            },
            arima: ArimaConfig { p: 4, d: 1, q: 0 },
            pot: PotConfig {
                q: 0.002,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    fn spiky_series(seed: u64) -> (Series, Vec<usize>) {
        let period = 96;
        let spikes: Vec<(usize, f64)> = (0..6).map(|i| (period * 6 + 20 + i * 28, 1.2)).collect();
        let s = generate_synthetic(8, period, 0.08, &spikes, seed).unwrap();
        (s, spikes.iter().map(|(i, _)| *i).collect())
    }

    #[test]
    fn fit_initializes_one_detector_per_learner() {
        let (series, _) = spiky_series(1);
        let train = series.slice(0..96 * 6).unwrap();
        let p = fit(&train, small_config(96)).unwrap();
        assert_eq!(p.detectors.len(), 3);
        assert_eq!(p.learner_names(), vec!["arima", "stl", "lstsvr"]);
    }

    #[test]
    fn single_learner_subset_builds_one_detector() {
        let (series, _) = spiky_series(2);
        let train = series.slice(0..96 * 6).unwrap();
        let config = EnsembleConfig {
            learners: vec![LearnerKind::Stl],
            vote_threshold: 1,
            ..small_config(96)
        };
        let p = fit(&train, config).unwrap();
        assert_eq!(p.detectors.len(), 1);
        assert!(p.detectors.contains_key("stl"));
    }

    #[test]
    fn fit_rejects_tiny_training_set() {
        let s = generate_synthetic(1, 10, 0.0, &[], 0).unwrap();
        assert!(matches!(
            fit(&s, small_config(96)),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn detects_injected_spikes() {
        let (series, spike_indices) = spiky_series(3);
        let split = 96 * 6;
        let train = series.slice(0..split).unwrap();
        let test = series.slice(split..series.len()).unwrap();
        let mut p = fit(&train, small_config(96)).unwrap();
        let detections = p.detect_batch(&test).unwrap();
        assert_eq!(detections.len(), test.len());

        for d in &detections {
            for report in d.learners.values() {
                assert!((report.error - (d.value - report.prediction).abs()).abs() < 1e-12);
            }
        }

        let flagged: Vec<usize> = detections
            .iter()
            .filter(|d| d.ensemble)
            .map(|d| d.index as usize)
            .collect();
        for spike in spike_indices {
            assert!(
                flagged.iter().any(|f| f.abs_diff(spike) <= 7),
                "spike at {spike} not flagged; flagged = {flagged:?}"
            );
        }
    }

    #[test]
    fn noise_free_sine_yields_no_ensemble_flags() {
        let period = 96;
        let s = generate_synthetic(8, period, 0.0, &[], 4).unwrap();
        let split = period * 6;
        let train = s.slice(0..split).unwrap();
        let test = s.slice(split..s.len()).unwrap();
        let mut p = fit(&train, small_config(period)).unwrap();
        let detections = p.detect_batch(&test).unwrap();
        assert!(detections.iter().all(|d| !d.ensemble));
    }

    #[test]
    fn vote_threshold_monotonicity() {
        let (series, _) = spiky_series(5);
        let split = 96 * 6;
        let train = series.slice(0..split).unwrap();
        let test = series.slice(split..series.len()).unwrap();
        let mut flags_by_threshold = Vec::new();
        for threshold in 1..=3 {
            let config = EnsembleConfig {
                vote_threshold: threshold,
                ..small_config(96)
            };
            let mut p = fit(&train, config).unwrap();
            let det = p.detect_batch(&test).unwrap();
            let flagged: Vec<u64> = det.iter().filter(|d| d.ensemble).map(|d| d.index).collect();
            flags_by_threshold.push(flagged);
        }
        for w in flags_by_threshold.windows(2) {
            for idx in &w[1] {
                assert!(w[0].contains(idx), "raising the threshold added {idx}");
            }
        }
    }

    #[test]
    fn single_learner_matches_its_own_detector_verdicts() {
        let (series, _) = spiky_series(6);
        let split = 96 * 6;
        let train = series.slice(0..split).unwrap();
        let test = series.slice(split..series.len()).unwrap();

        let solo = EnsembleConfig {
            learners: vec![LearnerKind::Stl],
            vote_threshold: 1,
            ..small_config(96)
        };
        let mut p = fit(&train, solo).unwrap();
        let detections = p.detect_batch(&test).unwrap();
        for d in &detections {
            let learner_flag = d
                .learners
                .get("stl")
                .map(|r| r.verdict == Verdict::Anomaly)
                .unwrap_or(false);
            assert_eq!(d.ensemble, learner_flag);
        }
    }

    #[test]
    fn no_flag_below_peak_threshold() {
        let (series, _) = spiky_series(7);
        let split = 96 * 6;
        let train = series.slice(0..split).unwrap();
        let test = series.slice(split..series.len()).unwrap();
        let mut p = fit(&train, small_config(96)).unwrap();
        for d in p.detect_batch(&test).unwrap() {
            for (name, report) in &d.learners {
                if report.verdict == Verdict::Anomaly {
                    let th = &d.thresholds[name];
                    assert!(report.error >= th.t, "{name} flagged below t");
                    assert!(report.error > th.z, "{name} flagged below z");
                }
            }
        }
    }

    #[test]
    fn error_average_mode_uses_shared_detector() {
        let (series, spike_indices) = spiky_series(8);
        let split = 96 * 6;
        let train = series.slice(0..split).unwrap();
        let test = series.slice(split..series.len()).unwrap();
        let config = EnsembleConfig {
            vote_mode: VoteMode::ErrorAverage,
            ..small_config(96)
        };
        let mut p = fit(&train, config).unwrap();
        assert!(p.shared.is_some());
        let detections = p.detect_batch(&test).unwrap();
        for d in &detections {
            if !d.warming {
                assert!(d.thresholds.contains_key(SHARED_DETECTOR_KEY));
            }
        }
        let flagged: Vec<usize> = detections
            .iter()
            .filter(|d| d.ensemble)
            .map(|d| d.index as usize)
            .collect();
        for spike in spike_indices {
            assert!(flagged.iter().any(|f| f.abs_diff(spike) <= 7));
        }
    }

    #[test]
    fn stream_push_equals_batch() {
        let (series, _) = spiky_series(9);
        let split = 96 * 6;
        let train = series.slice(0..split).unwrap();
        let test = series.slice(split..series.len()).unwrap();
        let config = EnsembleConfig {
            lstsvr: LstsvrConfig {
                train_span: 200,
                refit_every: 1,
                ..Default::default()
            },
            ..small_config(96)
        };
        let mut batch = fit(&train, config.clone()).unwrap();
        let mut stream = fit(&train, config).unwrap();
        let batch_out = batch.detect_batch(&test).unwrap();
        let mut stream_out = Vec::new();
        for point in &test.points {
            stream_out.push(stream.stream_push(*point).unwrap());
        }
        assert_eq!(batch_out, stream_out);
    }

    #[test]
    fn rejects_out_of_order_and_offgrid_points() {
        let (series, _) = spiky_series(10);
        let train = series.slice(0..96 * 6).unwrap();
        let mut p = fit(&train, small_config(96)).unwrap();
        let last = p.last_timestamp();
        let before = p.clone();
        assert!(matches!(
            p.stream_push(TimePoint {
                timestamp: last,
                value: 0.0,
                label: None
            }),
            Err(Error::OutOfOrderTimestamp { .. })
        ));
        assert!(matches!(
            p.stream_push(TimePoint {
                timestamp: last + 30,
                value: 0.0,
                label: None
            }),
            Err(Error::MisalignedTimestamp { .. })
        ));
        assert_eq!(p, before, "rejected points must not change state");
    }

    #[test]
    fn gap_triggers_warmup() {
        let (series, _) = spiky_series(11);
        let split = 96 * 6;
        let train = series.slice(0..split).unwrap();
        let mut p = fit(&train, small_config(96)).unwrap();
        let interval = p.interval();
        // jump 10 intervals ahead
        let mut ts = p.last_timestamp() + 10 * interval;
        let d = p
            .stream_push(TimePoint {
                timestamp: ts,
                value: 0.5,
                label: None,
            })
            .unwrap();
        assert!(d.warming);
        assert!(!d.ensemble);
        assert_eq!(d.index, split as u64 + 9);
        // stays warming until the window refills
        for i in 0..16 {
            ts += interval;
            let d = p
                .stream_push(TimePoint {
                    timestamp: ts,
                    value: 0.5 + i as f64 * 0.01,
                    label: None,
                })
                .unwrap();
            if i < 15 {
                assert!(d.warming, "step {i} should still be warming");
            } else {
                assert!(!d.warming, "warm-up should end once the window refills");
            }
        }
    }

    #[test]
    fn gapped_training_fits_on_longest_segment_and_keeps_phase() {
        let period = 96usize;
        let interval = 60i64;
        let wave = |g: i64| (2.0 * std::f64::consts::PI * g as f64 / period as f64).sin();
        // grid indices 0..2 periods, a one-period hole, then 6 periods
        let mut grid: Vec<i64> = (0..(2 * period) as i64).collect();
        grid.extend((3 * period as i64)..(9 * period as i64));
        let points: Vec<TimePoint> = grid
            .iter()
            .map(|&g| TimePoint {
                timestamp: g * interval,
                value: wave(g),
                label: None,
            })
            .collect();
        let train = Series::new("gappy", points, interval).unwrap();

        let mut p = fit(&train, small_config(period)).unwrap();

        // continuation right after the training end stays phase-aligned
        let mut flagged = 0;
        for g in (9 * period as i64)..(11 * period as i64) {
            let d = p
                .stream_push(TimePoint {
                    timestamp: g * interval,
                    value: wave(g),
                    label: None,
                })
                .unwrap();
            let stl = d.learners.get("stl").expect("warm after contiguous fit");
            assert!(
                (stl.prediction - wave(g)).abs() < 1e-3,
                "phase drift at {g}: {} vs {}",
                stl.prediction,
                wave(g)
            );
            flagged += d.ensemble as usize;
        }
        assert_eq!(flagged, 0);

        // a genuine spike on the continuation still alerts
        let g = 11 * period as i64;
        let d = p
            .stream_push(TimePoint {
                timestamp: g * interval,
                value: wave(g) + 2.0,
                label: None,
            })
            .unwrap();
        assert!(d.ensemble);
    }

    #[test]
    fn gapped_training_with_trailing_short_segment_rewarns() {
        let period = 96usize;
        let interval = 60i64;
        let wave = |g: i64| (2.0 * std::f64::consts::PI * g as f64 / period as f64).sin();
        // 6 periods, a hole, then a short 30-point tail
        let mut grid: Vec<i64> = (0..(6 * period) as i64).collect();
        grid.extend((7 * period as i64)..(7 * period as i64 + 30));
        let points: Vec<TimePoint> = grid
            .iter()
            .map(|&g| TimePoint {
                timestamp: g * interval,
                value: wave(g),
                label: None,
            })
            .collect();
        let train = Series::new("gappy", points, interval).unwrap();
        let p = fit(&train, small_config(period)).unwrap();
        // the tail was streamed: the pipeline sits at its end, warm again
        // (30 points exceed the 16-point window)
        assert_eq!(p.last_timestamp(), (7 * period as i64 + 29) * interval);
        assert!(p.ready());
    }

    #[test]
    fn checkpoint_restore_resumes_identically() {
        let (series, _) = spiky_series(12);
        let split = 96 * 6;
        let train = series.slice(0..split).unwrap();
        let test = series.slice(split..series.len()).unwrap();
        let mut p = fit(&train, small_config(96)).unwrap();
        let mid = test.len() / 2;
        for point in &test.points[..mid] {
            p.stream_push(*point).unwrap();
        }
        let doc = p.checkpoint().unwrap();
        assert!(doc.contains("\"schema_version\":1"));
        let mut restored = EnsemblePipeline::restore(&doc).unwrap();
        for point in &test.points[mid..] {
            let a = p.stream_push(*point).unwrap();
            let b = restored.stream_push(*point).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn restore_rejects_truncated_and_wrong_version() {
        let (series, _) = spiky_series(13);
        let train = series.slice(0..96 * 6).unwrap();
        let p = fit(&train, small_config(96)).unwrap();
        let doc = p.checkpoint().unwrap();
        let truncated = &doc[..doc.len() / 2];
        assert!(matches!(
            EnsemblePipeline::restore(truncated),
            Err(Error::Checkpoint(_))
        ));
        let wrong = doc.replace("\"schema_version\":1", "\"schema_version\":99");
        assert!(matches!(
            EnsemblePipeline::restore(&wrong),
            Err(Error::Checkpoint(_))
        ));
    }

    #[test]
    fn interval_mismatch_rejected() {
        let (series, _) = spiky_series(14);
        let train = series.slice(0..96 * 6).unwrap();
        let mut p = fit(&train, small_config(96)).unwrap();
        let mut test = series.slice(96 * 6..96 * 8).unwrap();
        test.interval = 120;
        for point in test.points.iter_mut() {
            point.timestamp *= 2;
        }
        assert!(matches!(
            p.detect_batch(&test),
            Err(Error::IntervalMismatch { .. })
        ));
    }
}
