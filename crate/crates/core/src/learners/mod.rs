//! The three one-step base learners (ARIMA, STL, LS-TSVR) and their
//! numerical kernels: Loess smoothing, kernel matrices, and the
//! Moore-Penrose pseudoinverse.

mod arima;
mod forecaster;
mod kernel;
mod loess;
mod lstsvr;
mod pinv;
mod stl;

pub use arima::{
    arima_fit, arima_predict_next, difference, integrate_back, ArimaModel, ArimaState,
};
pub use forecaster::Forecaster;
pub use kernel::{kernel_matrix, KernelDescriptor};
pub use loess::{loess_smooth, tricubic};
pub use lstsvr::{lag_windows, lstsvr_fit, lstsvr_predict, KernelConfig, LsTsvrModel, LstsvrState};
pub use pinv::{moore_penrose_pinv, penrose_residuals, pinv_solve};
pub use stl::{stl_decompose, stl_predict_next, StlDecomposition, StlState, TrendExtrapolation};
