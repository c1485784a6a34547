//! Ensemble orchestration: configuration, the fitted pipeline, and
//! per-point detection records.

mod config;
mod detection;
mod pipeline;

pub use config::{ArimaConfig, EnsembleConfig, LearnerKind, LstsvrConfig, StlConfig, VoteMode};
pub use detection::{Detection, LearnerReport, ThresholdPair};
pub use pipeline::{fit, EnsemblePipeline, SHARED_DETECTOR_KEY};
