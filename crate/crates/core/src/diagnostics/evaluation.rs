//! Windowed precision / recall / F1 for anomaly predictions.
//!
//! A prediction within `T` steps of a ground-truth anomaly counts as a true
//! positive, under one-to-one matching: predictions are processed in
//! ascending index order and each takes the lowest-index unmatched truth
//! inside its window. Because every feasible set is an interval of equal
//! width, this greedy discipline attains the maximum possible match count.

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Match counts and the derived rates. Zero-denominator precision, recall,
/// and F1 are defined as 0 so reports never carry NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    #[serde(rename = "tp")]
    pub true_positives: usize,
    #[serde(rename = "fp")]
    pub false_positives: usize,
    #[serde(rename = "fn")]
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub t_window: usize,
}

impl EvalResult {
    /// Derive the rates from raw counts.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, t_window: usize) -> Self {
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        EvalResult {
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            precision,
            recall,
            f1,
            t_window,
        }
    }
}

/// Score predicted anomaly indices against ground-truth indices with a
/// `T`-step matching window. Inputs are treated as sets.
pub fn windowed_prf(
    pred_indices: &[usize],
    truth_indices: &[usize],
    t: usize,
) -> Result<EvalResult> {
    let mut pred = pred_indices.to_vec();
    let mut truth = truth_indices.to_vec();
    pred.sort_unstable();
    pred.dedup();
    truth.sort_unstable();
    truth.dedup();

    let mut tp = 0;
    let mut j = 0; // next unmatched truth
    for &p in &pred {
        while j < truth.len() && truth[j] + t < p {
            j += 1; // out of reach of this and every later prediction
        }
        if j < truth.len() && truth[j] <= p + t {
            tp += 1;
            j += 1;
        }
    }
    let fp = pred.len() - tp;
    let fn_ = truth.len() - tp;
    Ok(EvalResult::from_counts(tp, fp, fn_, t))
}
