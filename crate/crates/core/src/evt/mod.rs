//! Extreme-value machinery: the generalized Pareto distribution, its
//! parameter estimators, and the peaks-over-threshold detector.

mod fit;
mod gpd;
mod pot;

pub use fit::{
    gpd_fit_lme, gpd_fit_lme_hinted, gpd_fit_moments, moment_identity_check, LmeFit, LmeStatus,
};
pub use gpd::{gpd_cdf, gpd_quantile, gpd_sample, GpdParams, SHAPE_EPS};
pub use pot::{pot_quantile, PotConfig, PotState, Verdict};
