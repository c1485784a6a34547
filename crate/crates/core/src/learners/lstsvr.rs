//! Least-squares twin support vector regression.
//!
//! Both tube problems are solved in closed form through the Moore-Penrose
//! pseudoinverse of `G = [K(X, X^T) e]`:
//!
//! ```text
//! [w1; b1] = G+ (Y - eps1 * e)      [w2; b2] = G+ (Y + eps2 * e)
//! f(x) = 0.5 * K(x, X^T) (w1 + w2) + 0.5 * (b1 + b2)
//! ```
//!
//! Substituting the equality constraints makes both objective terms the same
//! residual, so the penalties C1/C2 drop out of the solution; they are kept
//! in the model record but do not affect it.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::kernel::{kernel_matrix, KernelDescriptor};
use crate::learners::pinv::moore_penrose_pinv;

/// Kernel selection as configured; an unset RBF gamma is resolved from the
/// training data as `1 / (window * variance)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelConfig {
    #[default]
    Linear,
    Rbf {
        gamma: Option<f64>,
    },
}

impl KernelConfig {
    pub fn resolve(&self, values: &[f64], window: usize) -> Result<KernelDescriptor> {
        match *self {
            KernelConfig::Linear => Ok(KernelDescriptor::Linear),
            KernelConfig::Rbf { gamma: Some(g) } => KernelDescriptor::rbf(g),
            KernelConfig::Rbf { gamma: None } => {
                let n = values.len() as f64;
                let mean = values.iter().sum::<f64>() / n;
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                let denom = window as f64 * var;
                let gamma = if denom > 0.0 {
                    1.0 / denom
                } else {
                    1.0 / window as f64
                };
                KernelDescriptor::rbf(gamma)
            }
        }
    }
}

/// Fitted twin-SVR model in dual form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsTsvrModel {
    pub support_inputs: DMatrix<f64>,
    pub omega1: DVector<f64>,
    pub omega2: DVector<f64>,
    pub b1: f64,
    pub b2: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub c1: f64,
    pub c2: f64,
    pub kernel: KernelDescriptor,
}

/// Solve both tube problems on training windows `x` with targets `y`.
pub fn lstsvr_fit(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    kernel: KernelDescriptor,
    eps1: f64,
    eps2: f64,
    c1: f64,
    c2: f64,
) -> Result<LsTsvrModel> {
    let m = x.nrows();
    if m != y.len() || m < 2 {
        return Err(Error::InsufficientData(format!(
            "twin SVR needs at least 2 training rows with matching targets, got {m} rows / {} targets",
            y.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite training data".into()));
    }
    if !(eps1 >= 0.0 && eps2 >= 0.0) {
        return Err(Error::InvalidParameter(
            "tube widths must be non-negative".into(),
        ));
    }
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(Error::InvalidParameter("penalties must be positive".into()));
    }

    let k = kernel_matrix(x, x, kernel)?;
    let mut g = DMatrix::zeros(m, m + 1);
    g.view_mut((0, 0), (m, m)).copy_from(&k);
    g.column_mut(m).fill(1.0);
    let g_pinv = moore_penrose_pinv(&g)?;

    let ones = DVector::from_element(m, 1.0);
    let u1 = &g_pinv * (y - &ones * eps1);
    let u2 = &g_pinv * (y + &ones * eps2);

    Ok(LsTsvrModel {
        support_inputs: x.clone(),
        omega1: u1.rows(0, m).into_owned(),
        omega2: u2.rows(0, m).into_owned(),
        b1: u1[m],
        b2: u2[m],
        eps1,
        eps2,
        c1,
        c2,
        kernel,
    })
}

/// Evaluate the averaged regression function at one lag window.
pub fn lstsvr_predict(model: &LsTsvrModel, x: &[f64]) -> Result<f64> {
    let m = model.support_inputs.nrows();
    if x.len() != model.support_inputs.ncols() {
        return Err(Error::InvalidParameter(format!(
            "input window of {} does not match model window of {}",
            x.len(),
            model.support_inputs.ncols()
        )));
    }
    let mut acc = 0.0;
    let mut row = vec![0.0; model.support_inputs.ncols()];
    for i in 0..m {
        for (j, v) in row.iter_mut().enumerate() {
            *v = model.support_inputs[(i, j)];
        }
        acc += model.kernel.eval(x, &row) * (model.omega1[i] + model.omega2[i]);
    }
    Ok(0.5 * acc + 0.5 * (model.b1 + model.b2))
}

/// Build lag windows: row i is `values[i..i+window]` with target
/// `values[i+window]`.
pub fn lag_windows(values: &[f64], window: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if window == 0 {
        return Err(Error::InvalidParameter("window must be positive".into()));
    }
    if values.len() < window + 2 {
        return Err(Error::InsufficientData(format!(
            "need at least {} values for window {window}, got {}",
            window + 2,
            values.len()
        )));
    }
    let rows = values.len() - window;
    let x = DMatrix::from_fn(rows, window, |i, j| values[i + j]);
    let y = DVector::from_fn(rows, |i, _| values[i + window]);
    Ok((x, y))
}

/// Streaming wrapper: predicts from the cached model and re-solves on a
/// sliding window of recent values every `refit_every` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstsvrState {
    pub model: LsTsvrModel,
    window: usize,
    train_span: usize,
    refit_every: u64,
    kernel_config: KernelConfig,
    steps_since_refit: u64,
}

impl LstsvrState {
    /// Fit on the most recent `train_span` values of `train`.
    #[allow(clippy::too_many_arguments)]
    pub fn fit(
        train: &[f64],
        window: usize,
        train_span: usize,
        refit_every: u64,
        kernel_config: KernelConfig,
        eps1: f64,
        eps2: f64,
        c1: f64,
        c2: f64,
    ) -> Result<Self> {
        let span = train.len().min(train_span.max(window + 2));
        let slice = &train[train.len() - span..];
        let kernel = kernel_config.resolve(slice, window)?;
        let (x, y) = lag_windows(slice, window)?;
        let model = lstsvr_fit(&x, &y, kernel, eps1, eps2, c1, c2)?;
        Ok(LstsvrState {
            model,
            window,
            train_span: span.max(window + 2),
            refit_every: refit_every.max(1),
            kernel_config,
            steps_since_refit: 0,
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn can_predict(&self, history_len: usize) -> bool {
        history_len >= self.window
    }

    /// Forecast the next value from the trailing window of `recent`.
    pub fn predict(&self, recent: &[f64]) -> Result<f64> {
        if recent.len() < self.window {
            return Err(Error::InsufficientData(format!(
                "need {} history points, have {}",
                self.window,
                recent.len()
            )));
        }
        lstsvr_predict(&self.model, &recent[recent.len() - self.window..])
    }

    /// Advance one point, reporting whether a refit is due.
    pub fn advance(&mut self) -> bool {
        self.steps_since_refit += 1;
        self.steps_since_refit >= self.refit_every
    }

    /// Re-solve on the most recent `train_span` values of `recent`.
    /// No-op when `recent` is still too short.
    pub fn refit(&mut self, recent: &[f64]) -> Result<()> {
        if recent.len() < self.window + 2 {
            return Ok(());
        }
        let span = recent.len().min(self.train_span);
        let slice = &recent[recent.len() - span..];
        let kernel = self.kernel_config.resolve(slice, self.window)?;
        let (x, y) = lag_windows(slice, self.window)?;
        self.model = lstsvr_fit(
            &x,
            &y,
            kernel,
            self.model.eps1,
            self.model.eps2,
            self.model.c1,
            self.model.c2,
        )?;
        self.steps_since_refit = 0;
        Ok(())
    }

    /// Advance one point; refit from `recent` when the schedule says so.
    pub fn observe(&mut self, recent: &[f64]) -> Result<()> {
        if self.advance() {
            self.refit(recent)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_data(n: usize) -> (DMatrix<f64>, DVector<f64>) {
        // y = 2x + 1 over scalar inputs
        let x = DMatrix::from_fn(n, 1, |i, _| i as f64);
        let y = DVector::from_fn(n, |i, _| 2.0 * i as f64 + 1.0);
        (x, y)
    }

    #[test]
    fn equal_tubes_give_identical_solutions() {
        let (x, y) = linear_data(8);
        let m = lstsvr_fit(&x, &y, KernelDescriptor::Linear, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert!((m.b1 - m.b2).abs() < 1e-10);
        for i in 0..8 {
            assert!((m.omega1[i] - m.omega2[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn exact_on_consistent_linear_system() {
        let (x, y) = linear_data(10);
        let m = lstsvr_fit(&x, &y, KernelDescriptor::Linear, 0.0, 0.0, 1.0, 1.0).unwrap();
        for i in 0..10 {
            let f = lstsvr_predict(&m, &[i as f64]).unwrap();
            assert!((f - y[i]).abs() < 1e-8, "at {i}: {f} vs {}", y[i]);
        }
        let f = lstsvr_predict(&m, &[10.0]).unwrap();
        assert!((f - 21.0).abs() < 1e-6);
    }

    #[test]
    fn average_is_invariant_to_symmetric_tubes() {
        let (x, y) = linear_data(9);
        let base = lstsvr_fit(&x, &y, KernelDescriptor::Linear, 0.0, 0.0, 1.0, 1.0).unwrap();
        let offset = lstsvr_fit(&x, &y, KernelDescriptor::Linear, 0.7, 0.7, 1.0, 1.0).unwrap();
        for probe in [0.0, 2.5, 11.0] {
            let a = lstsvr_predict(&base, &[probe]).unwrap();
            let b = lstsvr_predict(&offset, &[probe]).unwrap();
            assert!((a - b).abs() < 1e-10, "probe {probe}: {a} vs {b}");
        }
    }

    #[test]
    fn constant_model_predicts_its_bias() {
        let m = LsTsvrModel {
            support_inputs: DMatrix::zeros(3, 2),
            omega1: DVector::zeros(3),
            omega2: DVector::zeros(3),
            b1: 4.0,
            b2: 4.0,
            eps1: 0.0,
            eps2: 0.0,
            c1: 1.0,
            c2: 1.0,
            kernel: KernelDescriptor::Linear,
        };
        assert_eq!(lstsvr_predict(&m, &[9.0, -3.0]).unwrap(), 4.0);
    }

    #[test]
    fn penalties_do_not_change_the_solution() {
        let (x, y) = linear_data(7);
        let a = lstsvr_fit(&x, &y, KernelDescriptor::Linear, 0.1, 0.2, 1.0, 1.0).unwrap();
        let b = lstsvr_fit(&x, &y, KernelDescriptor::Linear, 0.1, 0.2, 50.0, 0.01).unwrap();
        assert!((a.b1 - b.b1).abs() < 1e-12);
        assert!((a.b2 - b.b2).abs() < 1e-12);
    }

    #[test]
    fn one_step_sine_prediction() {
        let period = 64;
        let n = period * 4;
        let values: Vec<f64> = (0..n)
            .map(|t| (2.0 * std::f64::consts::PI * t as f64 / period as f64).sin())
            .collect();
        let window = 16;
        let split = period * 3;
        let state = LstsvrState::fit(
            &values[..split],
            window,
            split,
            u64::MAX,
            KernelConfig::Linear,
            0.0,
            0.0,
            1.0,
            1.0,
        )
        .unwrap();
        let mut sq = 0.0;
        for t in split..n {
            let f = state.predict(&values[..t]).unwrap();
            sq += (f - values[t]).powi(2);
        }
        let mse = sq / (n - split) as f64;
        assert!(mse < 1e-3, "mse {mse}");
    }

    #[test]
    fn rejects_window_mismatch() {
        let (x, y) = linear_data(5);
        let m = lstsvr_fit(&x, &y, KernelDescriptor::Linear, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(lstsvr_predict(&m, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn rejects_empty_training() {
        let x = DMatrix::<f64>::zeros(1, 3);
        let y = DVector::<f64>::zeros(1);
        assert!(lstsvr_fit(&x, &y, KernelDescriptor::Linear, 0.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn rbf_gamma_resolution_uses_variance() {
        let values: Vec<f64> = (0..100).map(|i| (i % 10) as f64).collect();
        let k = KernelConfig::Rbf { gamma: None }
            .resolve(&values, 10)
            .unwrap();
        match k {
            KernelDescriptor::Rbf { gamma } => assert!(gamma > 0.0 && gamma.is_finite()),
            _ => panic!("expected rbf"),
        }
    }
}
