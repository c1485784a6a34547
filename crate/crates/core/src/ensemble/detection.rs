//! Per-point detection records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::evt::Verdict;

/// One learner's view of a point: its forecast, the reconstruction error,
/// and the detector verdict. All values are on the original data scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerReport {
    pub prediction: f64,
    pub error: f64,
    pub verdict: Verdict,
}

/// Current (t, z) thresholds of one detector, original scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPair {
    pub t: f64,
    pub z: f64,
}

/// Verdict for one streamed point.
///
/// During warm-up (`warming == true`) no learner reports are produced and
/// the ensemble verdict is false. In error-average mode the shared detector
/// appears under the `"ensemble"` threshold key and per-learner verdicts
/// stay `normal`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub index: u64,
    pub timestamp: i64,
    pub value: f64,
    pub warming: bool,
    pub learners: BTreeMap<String, LearnerReport>,
    pub ensemble: bool,
    pub thresholds: BTreeMap<String, ThresholdPair>,
}

impl Detection {
    /// CSV header for a fixed learner column order.
    pub fn csv_header(learner_names: &[&str]) -> String {
        let mut cols = vec![
            "index".to_string(),
            "timestamp".to_string(),
            "value".to_string(),
            "warming".to_string(),
            "ensemble".to_string(),
        ];
        for name in learner_names {
            for field in ["prediction", "error", "verdict", "t", "z"] {
                cols.push(format!("{name}_{field}"));
            }
        }
        cols.join(",")
    }

    /// Flatten to one CSV row matching [`Detection::csv_header`].
    pub fn csv_row(&self, learner_names: &[&str]) -> String {
        let mut cols = vec![
            self.index.to_string(),
            self.timestamp.to_string(),
            format!("{}", self.value),
            self.warming.to_string(),
            (self.ensemble as u8).to_string(),
        ];
        for name in learner_names {
            match self.learners.get(*name) {
                Some(r) => {
                    cols.push(format!("{}", r.prediction));
                    cols.push(format!("{}", r.error));
                    cols.push(
                        match r.verdict {
                            Verdict::Normal => "normal",
                            Verdict::Candidate => "candidate",
                            Verdict::Anomaly => "anomaly",
                        }
                        .to_string(),
                    );
                }
                None => cols.extend(["".into(), "".into(), "".into()]),
            }
            match self.thresholds.get(*name) {
                Some(th) => {
                    cols.push(format!("{}", th.t));
                    cols.push(format!("{}", th.z));
                }
                None => cols.extend(["".into(), "".into()]),
            }
        }
        cols.join(",")
    }
}
