//! Trial, grid, and transfer configuration files (JSON). Flags override
//! file values; see `main.rs` for the mapping.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use shapegraph_core::dataset::SyntheticSpec;
use shapegraph_core::gcn::TrainParams;
use shapegraph_core::graph::ConnectionStrategy;
use shapegraph_core::svr::GridSpec;

use crate::error::{CliError, Result};

/// Where the node table comes from: a CSV file or an in-process synthetic
/// recipe. Inside a trial the synthetic seed is replaced by the trial seed,
/// so one integer governs the whole run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    Csv(PathBuf),
    Synthetic(SyntheticSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Gcn,
    Svr,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::Gcn => write!(f, "gcn"),
            ModelKind::Svr => write!(f, "svr"),
        }
    }
}

impl ModelKind {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "gcn" => Ok(ModelKind::Gcn),
            "svr" => Ok(ModelKind::Svr),
            other => Err(CliError::Config(format!("unknown model `{other}` (gcn|svr)"))),
        }
    }
}

/// Which nodes evaluation scores against which targets.
///
/// Synthetic trials default to `hidden_truth` (unlabeled nodes against the
/// generator's pre-mask labels); CSV trials default to `kfold` with k = 5
/// (labeled nodes held out fold by fold and re-trained).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalProtocol {
    HiddenTruth,
    Kfold { k: usize },
}

/// SVR-side settings: the hyperparameter grid (its seed field is replaced
/// by the trial seed) and whether raw positions are appended to the feature
/// vectors. By default the SVR sees exactly the row-normalized features the
/// GCN sees and nothing about geometry.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SvrSettings {
    pub grid: GridSpec,
    pub use_positions: bool,
}

fn default_min_per_step() -> usize {
    5
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_out() -> PathBuf {
    PathBuf::from("runs")
}

fn default_bins() -> usize {
    shapegraph_core::eval::DEFAULT_HISTOGRAM_BINS
}

/// One cell of the experiment grid: data source, filtering, connection
/// strategy, model, training settings, seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialConfig {
    pub dataset: DatasetSource,
    #[serde(default)]
    pub filter_pct: f64,
    #[serde(default = "default_min_per_step")]
    pub min_per_step: usize,
    pub strategy: ConnectionStrategy,
    pub model: ModelKind,
    #[serde(default)]
    pub train: TrainParams,
    #[serde(default)]
    pub svr: SvrSettings,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub eval: Option<EvalProtocol>,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    #[serde(default)]
    pub dump_graph: bool,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(CliError::Config("seeds list is empty".into()));
        }
        if !(0.0..=100.0).contains(&self.filter_pct) {
            return Err(CliError::Config(format!("filter_pct {} outside [0, 100]", self.filter_pct)));
        }
        if self.histogram_bins < 1 {
            return Err(CliError::Config("histogram_bins must be >= 1".into()));
        }
        if matches!(
            (self.eval, &self.dataset),
            (Some(EvalProtocol::HiddenTruth), DatasetSource::Csv(_))
        ) {
            return Err(CliError::Config("hidden_truth evaluation needs a synthetic dataset".into()));
        }
        if let Some(EvalProtocol::Kfold { k }) = self.eval {
            if k < 2 {
                return Err(CliError::Config("kfold k must be >= 2".into()));
            }
        }
        Ok(())
    }

    /// The protocol actually used: explicit config first, else by source.
    pub fn eval_protocol(&self) -> EvalProtocol {
        self.eval.unwrap_or(match self.dataset {
            DatasetSource::Synthetic(_) => EvalProtocol::HiddenTruth,
            DatasetSource::Csv(_) => EvalProtocol::Kfold { k: 5 },
        })
    }
}

/// Filter level of a grid: percentage plus its node floor (the sparsest
/// level usually pairs with a floor of 1).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FilterSpec {
    pub pct: f64,
    #[serde(default = "default_min_per_step")]
    pub min_per_step: usize,
}

fn default_filters() -> Vec<FilterSpec> {
    vec![FilterSpec { pct: 0.0, min_per_step: 5 }]
}

/// A sweep: the cross product of filters, strategies, and seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridConfig {
    pub dataset: DatasetSource,
    pub model: ModelKind,
    #[serde(default = "default_filters")]
    pub filters: Vec<FilterSpec>,
    pub strategies: Vec<ConnectionStrategy>,
    #[serde(default)]
    pub train: TrainParams,
    #[serde(default)]
    pub svr: SvrSettings,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub eval: Option<EvalProtocol>,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.strategies.is_empty() {
            return Err(CliError::Config("strategies list is empty".into()));
        }
        if self.filters.is_empty() {
            return Err(CliError::Config("filters list is empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(CliError::Config("seeds list is empty".into()));
        }
        Ok(())
    }

    /// Expands the grid into per-cell trial configs (single seed each).
    pub fn cells(&self) -> Vec<TrialConfig> {
        let mut out = Vec::new();
        for filter in &self.filters {
            for &strategy in &self.strategies {
                for &seed in &self.seeds {
                    out.push(TrialConfig {
                        dataset: self.dataset.clone(),
                        filter_pct: filter.pct,
                        min_per_step: filter.min_per_step,
                        strategy,
                        model: self.model,
                        train: self.train.clone(),
                        svr: self.svr.clone(),
                        seeds: vec![seed],
                        out_dir: self.out_dir.clone(),
                        eval: self.eval,
                        histogram_bins: self.histogram_bins,
                        dump_graph: false,
                    });
                }
            }
        }
        out
    }
}

/// Transfer run: a frozen model (or a trial to train one) applied to a
/// different geometry with no filtering.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransferConfig {
    pub source: TransferSource,
    pub target_csv: PathBuf,
    #[serde(default = "default_transfer_strategy")]
    pub strategy: ConnectionStrategy,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferSource {
    Checkpoint(PathBuf),
    Trial(Box<TrialConfig>),
}

fn default_transfer_strategy() -> ConnectionStrategy {
    ConnectionStrategy::Knn { k: 8 }
}

/// Reads and deserializes a JSON config file.
pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
