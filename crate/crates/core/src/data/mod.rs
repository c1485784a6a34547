//! Time-series data model: ingestion, normalization, descriptive statistics,
//! and synthetic dataset generation.

mod csv_io;
mod series;
mod stats;
mod synthetic;

pub use csv_io::{load_csv, write_csv, ColumnMapping};
pub use series::{denormalize, normalize, NormalizationParams, Series, TimePoint};
pub use stats::{describe, quantile_sorted, SeriesStats};
pub use synthetic::{generate_synthetic, SYNTHETIC_INTERVAL};
