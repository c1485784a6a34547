//! Run configuration: a TOML file with documented defaults, overridable by
//! command-line flags (flags win).

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use trident_core::data::ColumnMapping;
use trident_core::ensemble::EnsembleConfig;

use crate::failure::{CliResult, Failure};

/// Detection output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Jsonl,
    Csv,
}

/// Everything a run needs: the ensemble configuration plus IO schema, seed,
/// output format, and evaluation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; all randomness in a run flows from it.
    pub seed: u64,
    pub format: OutputFormat,
    /// Matching window (steps) for windowed precision/recall/F1.
    pub t_window: usize,
    pub ensemble: EnsembleConfig,
    pub csv: ColumnMapping,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            format: OutputFormat::Jsonl,
            t_window: 7,
            ensemble: EnsembleConfig::default(),
            csv: ColumnMapping::default(),
        }
    }
}

impl RunConfig {
    /// Load from a TOML file; a missing `path` yields the defaults.
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Failure::io(format!("cannot read config {}: {e}", p.display())))?;
                toml::from_str(&text)
                    .map_err(|e| Failure::config(format!("bad config {}: {e}", p.display())))
            }
        }
    }

    /// Hash of the effective configuration, for run metadata.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// First line of detection outputs: reproducibility metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMeta {
    pub meta: MetaFields,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetaFields {
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

impl RunMeta {
    pub fn new(config: &RunConfig) -> Self {
        RunMeta {
            meta: MetaFields {
                schema_version: 1,
                config_hash: config.hash(),
                seed: config.seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
        }
    }

    pub fn csv_comment(&self) -> String {
        format!(
            "# schema_version={} config_hash={} seed={} version={}",
            self.meta.schema_version, self.meta.config_hash, self.meta.seed, self.meta.version
        )
    }
}
