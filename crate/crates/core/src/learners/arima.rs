//! ARIMA one-step forecasting with Hannan-Rissanen coefficient estimation.
//!
//! Estimation is closed form: a long autoregression provides residual
//! proxies, then the AR and MA coefficients come from a single least-squares
//! regression on lagged values and lagged proxies. No iterative likelihood
//! search is involved.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::pinv::pinv_solve;

/// Apply first differencing `d` times; output length shrinks by `d`.
pub fn difference(x: &[f64], d: usize) -> Result<Vec<f64>> {
    if x.len() <= d {
        return Err(Error::InsufficientData(format!(
            "cannot difference {} points {d} times",
            x.len()
        )));
    }
    let mut out = x.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(out)
}

/// Invert [`difference`]: `initials` holds the first value of each
/// differencing level (`x[0]`, `(x[1]-x[0])`, ...).
pub fn integrate_back(diffed: &[f64], initials: &[f64]) -> Vec<f64> {
    let mut level = diffed.to_vec();
    for &head in initials.iter().rev() {
        let mut up = Vec::with_capacity(level.len() + 1);
        up.push(head);
        for v in &level {
            up.push(up.last().unwrap() + v);
        }
        level = up;
    }
    level
}

/// Fitted ARIMA(p, d, q) coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaModel {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    /// AR coefficients, lag 1 first.
    pub phi: Vec<f64>,
    /// MA coefficients, lag 1 first.
    pub theta: Vec<f64>,
    /// Constant on the differenced scale.
    pub c: f64,
}

impl ArimaModel {
    pub fn new(
        p: usize,
        d: usize,
        q: usize,
        phi: Vec<f64>,
        theta: Vec<f64>,
        c: f64,
    ) -> Result<Self> {
        if phi.len() != p || theta.len() != q {
            return Err(Error::InvalidParameter(format!(
                "coefficient lengths ({}, {}) do not match orders ({p}, {q})",
                phi.len(),
                theta.len()
            )));
        }
        Ok(ArimaModel {
            p,
            d,
            q,
            phi,
            theta,
            c,
        })
    }
}

/// Fit ARIMA(p, d, q) by the Hannan-Rissanen two-stage procedure.
pub fn arima_fit(train: &[f64], p: usize, d: usize, q: usize) -> Result<ArimaModel> {
    if train.len() < p + q + d + 20 {
        return Err(Error::InsufficientData(format!(
            "ARIMA({p},{d},{q}) needs at least {} points, got {}",
            p + q + d + 20,
            train.len()
        )));
    }
    let w = difference(train, d)?;
    let n = w.len();

    // Stage 1: long AR for residual proxies (only needed when q > 0).
    let proxies_from;
    let proxies: Vec<f64>;
    if q > 0 {
        let h = (n / 10).clamp(1, 20).max(p);
        let beta = regress_lags(&w, &[], h, 0, h)?;
        let mut eps = vec![0.0; n];
        for t in h..n {
            let mut pred = beta[0];
            for i in 1..=h {
                pred += beta[i] * w[t - i];
            }
            eps[t] = w[t] - pred;
        }
        proxies_from = h;
        proxies = eps;
    } else {
        proxies_from = 0;
        proxies = Vec::new();
    }

    // Stage 2: joint regression on p value lags and q proxy lags.
    let t0 = p.max(proxies_from + q);
    if n <= t0 + p + q {
        return Err(Error::InsufficientData(
            "not enough rows for the lag regression".into(),
        ));
    }
    let beta = regress_lags(&w, &proxies, p, q, t0)?;
    let c = beta[0];
    let phi = beta.as_slice()[1..=p].to_vec();
    let theta = beta.as_slice()[p + 1..=p + q].to_vec();
    if !phi.iter().chain(&theta).chain([&c]).all(|v| v.is_finite()) {
        return Err(Error::Numeric("singular lag regression".into()));
    }
    ArimaModel::new(p, d, q, phi, theta, c)
}

/// Least squares of `w[t]` on an intercept, `p` lags of `w`, and `q` lags
/// of `proxies`, over rows `t0..`. Returns the minimum-norm solution.
fn regress_lags(w: &[f64], proxies: &[f64], p: usize, q: usize, t0: usize) -> Result<DVector<f64>> {
    let n = w.len();
    let rows = n - t0;
    let cols = 1 + p + q;
    let mut design = DMatrix::zeros(rows, cols);
    let mut target = DVector::zeros(rows);
    for (r, t) in (t0..n).enumerate() {
        design[(r, 0)] = 1.0;
        for i in 1..=p {
            design[(r, i)] = w[t - i];
        }
        for j in 1..=q {
            design[(r, p + j)] = proxies[t - j];
        }
        target[r] = w[t];
    }
    pinv_solve(&design, &target)
}

/// Incremental ARIMA recursion state: ring buffers of recent differenced
/// values and residuals plus the per-level integration carry. Each update
/// is O(p + q + d).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaState {
    pub model: ArimaModel,
    levels: Vec<f64>,
    levels_filled: usize,
    lags: VecDeque<f64>,
    resid: VecDeque<f64>,
}

impl ArimaState {
    pub fn new(model: ArimaModel) -> Self {
        let d = model.d;
        ArimaState {
            model,
            levels: vec![0.0; d],
            levels_filled: 0,
            lags: VecDeque::new(),
            resid: VecDeque::new(),
        }
    }

    /// Drop observation history (e.g. after a gap); the coefficients stay.
    pub fn reset_history(&mut self) {
        self.levels_filled = 0;
        self.lags.clear();
        self.resid.clear();
    }

    pub fn can_predict(&self) -> bool {
        self.levels_filled == self.model.d && self.lags.len() >= self.model.p
    }

    /// Forecast on the differenced scale; missing lags count as zero.
    fn predict_differenced(&self) -> f64 {
        let m = &self.model;
        let mut w = m.c;
        for (i, phi) in m.phi.iter().enumerate() {
            if let Some(v) = self.lags.get(self.lags.len().wrapping_sub(i + 1)) {
                w += phi * v;
            }
        }
        for (j, theta) in m.theta.iter().enumerate() {
            if let Some(v) = self.resid.get(self.resid.len().wrapping_sub(j + 1)) {
                w += theta * v;
            }
        }
        w
    }

    /// One-step forecast on the original scale.
    pub fn predict(&self) -> Result<f64> {
        if !self.can_predict() {
            return Err(Error::InsufficientData(format!(
                "ARIMA needs {} history points before predicting",
                self.model.p + self.model.d
            )));
        }
        Ok(self.predict_differenced() + self.levels.iter().sum::<f64>())
    }

    /// Consume one observed value, advancing the recursion.
    pub fn observe(&mut self, y: f64) {
        let mut v = y;
        for lvl in 0..self.model.d {
            if lvl < self.levels_filled {
                let prev = self.levels[lvl];
                self.levels[lvl] = v;
                v -= prev;
            } else {
                self.levels[lvl] = v;
                self.levels_filled = lvl + 1;
                return;
            }
        }
        let predicted = self.predict_differenced();
        self.lags.push_back(v);
        if self.lags.len() > self.model.p {
            self.lags.pop_front();
        }
        if self.model.q > 0 {
            self.resid.push_back(v - predicted);
            if self.resid.len() > self.model.q {
                self.resid.pop_front();
            }
        }
    }

    /// Replay a training series, returning the primed state and the
    /// in-sample one-step absolute errors (from the first predictable point).
    pub fn fit_replay(model: ArimaModel, train: &[f64]) -> (Self, Vec<f64>) {
        let mut state = ArimaState::new(model);
        let mut errors = Vec::new();
        for &y in train {
            if state.can_predict() {
                let pred = state.predict_differenced() + state.levels.iter().sum::<f64>();
                errors.push((y - pred).abs());
            }
            state.observe(y);
        }
        (state, errors)
    }
}

/// One-step forecast of `model` after replaying `history` from its start.
pub fn arima_predict_next(model: &ArimaModel, history: &[f64]) -> Result<f64> {
    if history.len() < model.p + model.d {
        return Err(Error::InsufficientData(format!(
            "history of {} is shorter than p + d = {}",
            history.len(),
            model.p + model.d
        )));
    }
    let mut state = ArimaState::new(model.clone());
    for &y in history {
        state.observe(y);
    }
    state.predict()
}
