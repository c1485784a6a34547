//! Streaming KPI anomaly detection built from three heterogeneous one-step
//! forecasters (ARIMA, STL, LS-TSVR) whose reconstruction errors feed
//! peaks-over-threshold detectors with generalized-Pareto tail fits; a
//! voting rule combines the per-learner verdicts.

// `!(x > 0.0)` deliberately rejects NaN alongside non-positive values;
// the un-negated comparison would wave NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod diagnostics;
pub mod ensemble;
mod error;
pub mod evt;
pub mod learners;

pub use error::{Error, Result};
