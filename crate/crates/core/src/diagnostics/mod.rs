//! Diagnostics: permutation-entropy complexity profiles, forecast accuracy
//! metrics, and windowed anomaly evaluation.

mod entropy;
mod evaluation;
mod metrics;

pub use entropy::{entropy_overlay, permutation_entropy, EntropyProfile, OverlayRow};
pub use evaluation::{windowed_prf, EvalResult};
pub use metrics::forecast_metrics;
