//! Common one-step forecaster contract shared by the three base learners.

use crate::error::Result;
use crate::learners::arima::{arima_predict_next, ArimaModel};
use crate::learners::lstsvr::{lstsvr_predict, LsTsvrModel};
use crate::learners::stl::{stl_predict_next, StlDecomposition};

/// A fitted model that can forecast the next value from a history slice.
/// Forecasts are deterministic given the fitted state and the history.
pub trait Forecaster {
    fn name(&self) -> &'static str;
    fn predict_next(&self, history: &[f64]) -> Result<f64>;
}

impl Forecaster for ArimaModel {
    fn name(&self) -> &'static str {
        "arima"
    }

    fn predict_next(&self, history: &[f64]) -> Result<f64> {
        arima_predict_next(self, history)
    }
}

impl Forecaster for StlDecomposition {
    fn name(&self) -> &'static str {
        "stl"
    }

    fn predict_next(&self, history: &[f64]) -> Result<f64> {
        stl_predict_next(self, history)
    }
}

impl Forecaster for LsTsvrModel {
    fn name(&self) -> &'static str {
        "lstsvr"
    }

    fn predict_next(&self, history: &[f64]) -> Result<f64> {
        let window = self.support_inputs.ncols();
        if history.len() < window {
            return Err(crate::error::Error::InsufficientData(format!(
                "need {window} history points, have {}",
                history.len()
            )));
        }
        lstsvr_predict(self, &history[history.len() - window..])
    }
}
