//! Reproducibility manifests: the resolved single-seed configuration, its
//! SHA-256 hash (which names the trial directory), and dataset statistics
//! observed during the run.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::TrialConfig;
use crate::error::{CliError, Result};

/// A trial config pinned to one seed. Hashing this (as canonical JSON with
/// sorted keys) identifies the trial.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolvedTrial {
    pub seed: u64,
    #[serde(flatten)]
    pub config: TrialConfig,
}

impl ResolvedTrial {
    pub fn new(config: &TrialConfig, seed: u64) -> Self {
        let mut config = config.clone();
        config.seeds = vec![seed];
        // one integer drives the whole trial
        if let crate::config::DatasetSource::Synthetic(spec) = &mut config.dataset {
            spec.seed = seed;
        }
        config.svr.grid.seed = seed;
        ResolvedTrial { seed, config }
    }

    /// Hex SHA-256 of the canonical JSON encoding. The output directory is
    /// excluded: a trial's identity is its data, pipeline, and seed, not
    /// where its artifacts land.
    pub fn hash(&self) -> Result<String> {
        let mut value = serde_json::to_value(self)
            .map_err(|e| CliError::Config(format!("config not serializable: {e}")))?;
        if let Some(map) = value.as_object_mut() {
            map.remove("out_dir");
        }
        // serde_json maps are BTree-backed, so `to_string` is canonical
        let canonical = serde_json::to_string(&value)
            .map_err(|e| CliError::Config(format!("config not serializable: {e}")))?;
        Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
    }
}

/// Dataset shape observed while running; recorded for comparison with the
/// trial plan (labeled/unlabeled ratio per filter level).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataStats {
    pub n_nodes_raw: usize,
    pub n_nodes: usize,
    pub n_labeled: usize,
    pub n_unlabeled: usize,
    pub labeled_ratio: f64,
    pub d: usize,
    pub edges: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub manifest_hash: String,
    pub resolved: ResolvedTrial,
    pub data: DataStats,
}

impl Manifest {
    pub fn new(resolved: ResolvedTrial, data: DataStats) -> Result<Self> {
        let manifest_hash = resolved.hash()?;
        Ok(Manifest {
            tool: "shapegraph".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            manifest_hash,
            resolved,
            data,
        })
    }
}
