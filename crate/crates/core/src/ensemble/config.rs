//! Pipeline configuration with documented defaults.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evt::PotConfig;
use crate::learners::{KernelConfig, TrendExtrapolation};

/// The three base learners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Arima,
    Stl,
    Lstsvr,
}

impl LearnerKind {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerKind::Arima => "arima",
            LearnerKind::Stl => "stl",
            LearnerKind::Lstsvr => "lstsvr",
        }
    }
}

/// How per-learner evidence becomes an ensemble verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VoteMode {
    /// At least `vote_threshold` learner detectors must flag the point.
    #[default]
    Majority,
    /// The mean of the per-learner errors feeds one shared detector.
    ErrorAverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArimaConfig {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl Default for ArimaConfig {
    fn default() -> Self {
        // d = 1 absorbs level drift; a pure-AR default avoids MA instability
        ArimaConfig { p: 5, d: 1, q: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StlConfig {
    /// Season length in points (one day of 1-minute samples by default).
    pub period: usize,
    /// Trend moving-average window; defaults to the period.
    pub trend_window: Option<usize>,
    /// Streaming refresh cadence in points; defaults to the period.
    pub refresh_every: Option<u64>,
    pub extrapolation: TrendExtrapolation,
}

impl Default for StlConfig {
    fn default() -> Self {
        StlConfig {
            period: 1440,
            trend_window: None,
            refresh_every: None,
            extrapolation: TrendExtrapolation::Last,
        }
    }
}

impl StlConfig {
    pub fn trend_window(&self) -> usize {
        self.trend_window.unwrap_or(self.period)
    }

    pub fn refresh_every(&self) -> u64 {
        self.refresh_every.unwrap_or(self.period as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LstsvrConfig {
    pub kernel: KernelConfig,
    pub eps1: f64,
    pub eps2: f64,
    pub c1: f64,
    pub c2: f64,
    /// Number of recent points used whenever the model is (re)fitted.
    pub train_span: usize,
    /// Streaming refit cadence in points.
    pub refit_every: u64,
}

impl Default for LstsvrConfig {
    fn default() -> Self {
        LstsvrConfig {
            kernel: KernelConfig::Linear,
            eps1: 0.0,
            eps2: 0.0,
            c1: 1.0,
            c2: 1.0,
            train_span: 720,
            refit_every: 1440,
        }
    }
}

/// Full pipeline configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub learners: Vec<LearnerKind>,
    pub vote_mode: VoteMode,
    pub vote_threshold: usize,
    /// History window a learner needs before the pipeline leaves warm-up;
    /// also the LS-TSVR lag-window length.
    pub window: usize,
    pub normalize_input: bool,
    pub pot: PotConfig,
    pub arima: ArimaConfig,
    pub stl: StlConfig,
    pub lstsvr: LstsvrConfig,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            learners: vec![LearnerKind::Arima, LearnerKind::Stl, LearnerKind::Lstsvr],
            vote_mode: VoteMode::Majority,
            vote_threshold: 2,
            window: 60,
            normalize_input: true,
            pot: PotConfig::default(),
            arima: ArimaConfig::default(),
            stl: StlConfig::default(),
            lstsvr: LstsvrConfig::default(),
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learners.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one learner required".into(),
            ));
        }
        let mut unique = self.learners.clone();
        unique.sort();
        unique.dedup();
        if unique.len() != self.learners.len() {
            return Err(Error::InvalidParameter(
                "duplicate learner in config".into(),
            ));
        }
        if self.vote_threshold < 1 || self.vote_threshold > self.learners.len() {
            return Err(Error::InvalidParameter(format!(
                "vote threshold {} outside 1..={}",
                self.vote_threshold,
                self.learners.len()
            )));
        }
        if self.window == 0 {
            return Err(Error::InvalidParameter("window must be positive".into()));
        }
        self.pot.validate()?;
        Ok(())
    }

    pub fn has(&self, kind: LearnerKind) -> bool {
        self.learners.contains(&kind)
    }

    /// Minimum training length the enabled learners and detector need.
    pub fn min_train_len(&self) -> usize {
        let mut need = self.window + 50;
        if self.has(LearnerKind::Stl) {
            need = need.max(2 * self.stl.period);
        }
        if self.has(LearnerKind::Arima) {
            let a = &self.arima;
            need = need.max(a.p + a.d + a.q + 20);
        }
        need
    }
}
