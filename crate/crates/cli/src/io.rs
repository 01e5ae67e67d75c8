//! File formats: table CSV + metadata sidecar, model checkpoints, report
//! and manifest JSON, residual/trend/CV CSVs, and the edge-list graph dump.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use shapegraph_core::dataset::NodeTable;
use shapegraph_core::eval::{EvalReport, TrendRow};
use shapegraph_core::gcn::GcnModel;
use shapegraph_core::graph::{ConnectionStrategy, Graph};
use shapegraph_core::svr::{CvRecord, SvrModel, SvrParams};

use crate::config::ModelKind;
use crate::error::{CliError, Result};
use crate::manifest::{DataStats, Manifest};

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(CliError::io(path))
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(CliError::io(parent))?;
    }
    fs::write(path, contents).map_err(CliError::io(path))
}

fn to_pretty_json<T: Serialize>(value: &T, what: &str) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Data(format!("cannot serialize {what}: {e}")))
}

/// Loads a node table from the CSV wire format.
pub fn load_table(path: &Path) -> Result<NodeTable> {
    let text = read_to_string(path)?;
    NodeTable::from_csv_str(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Metadata sidecar written next to generated tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableMeta {
    pub n: usize,
    pub d: usize,
    pub n_labeled: usize,
    pub units: Units,
    pub provenance: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Units {
    pub positions: String,
    pub labels: String,
}

/// Writes `table.csv` and `table.meta.json` under `dir`.
pub fn save_table(dir: &Path, table: &NodeTable, provenance: &str) -> Result<PathBuf> {
    let csv_path = dir.join("table.csv");
    write_string(&csv_path, &table.to_csv_string())?;
    let meta = TableMeta {
        n: table.n(),
        d: table.d(),
        n_labeled: table.n_labeled(),
        units: Units { positions: "mm".into(), labels: "mm".into() },
        provenance: provenance.into(),
    };
    write_string(&dir.join("table.meta.json"), &to_pretty_json(&meta, "table metadata")?)?;
    Ok(csv_path)
}

/// Ground-truth sidecar for synthetic tables: `id,label` for every node.
pub fn save_truth(dir: &Path, truth: &[f64]) -> Result<()> {
    let mut out = String::from("id,label\n");
    for (i, t) in truth.iter().enumerate() {
        let _ = writeln!(out, "{i},{t}");
    }
    write_string(&dir.join("truth.csv"), &out)
}

/// Frozen model, JSON-encoded. f64 values round-trip exactly, so a loaded
/// checkpoint reproduces predictions bit for bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Checkpoint {
    Gcn { model: GcnModel },
    Svr { model: SvrModel, params: SvrParams, use_positions: bool },
}

impl Checkpoint {
    pub fn model_kind(&self) -> ModelKind {
        match self {
            Checkpoint::Gcn { .. } => ModelKind::Gcn,
            Checkpoint::Svr { .. } => ModelKind::Svr,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CheckpointDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    manifest_hash: Option<String>,
    #[serde(flatten)]
    checkpoint: Checkpoint,
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint, manifest_hash: Option<&str>) -> Result<()> {
    let doc = CheckpointDoc {
        manifest_hash: manifest_hash.map(String::from),
        checkpoint: ckpt.clone(),
    };
    write_string(path, &to_pretty_json(&doc, "checkpoint")?)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = read_to_string(path)?;
    let doc: CheckpointDoc = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(doc.checkpoint)
}

/// Training summary kept in the report: per-model final losses (one entry
/// per fold, plus the final full-label model when folds are used) and the
/// loss curve of the checkpointed model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainSummary {
    pub final_losses: Vec<f64>,
    pub epochs: Vec<usize>,
    pub loss_curve: Vec<f64>,
}

/// Deterministic per-trial result document. Wall-clock data lives in
/// `timing.json` so re-running a manifest reproduces this file byte for
/// byte.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialReport {
    pub manifest_hash: String,
    pub seed: u64,
    pub model: ModelKind,
    pub strategy: String,
    pub filter_pct: f64,
    pub eval: EvalReport,
    pub data: DataStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svr_params: Option<SvrParams>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timing {
    pub manifest_hash: String,
    pub total_seconds: f64,
    pub train_seconds: Vec<f64>,
}

pub fn write_report(dir: &Path, report: &TrialReport) -> Result<()> {
    write_string(&dir.join("report.json"), &to_pretty_json(report, "report")?)
}

pub fn read_report(dir: &Path) -> Result<TrialReport> {
    let path = dir.join("report.json");
    let text = read_to_string(&path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    write_string(&dir.join("manifest.json"), &to_pretty_json(manifest, "manifest")?)
}

pub fn write_timing(dir: &Path, timing: &Timing) -> Result<()> {
    write_string(&dir.join("timing.json"), &to_pretty_json(timing, "timing")?)
}

/// `residuals.csv`: one row per evaluated node, residual = measured - predicted.
pub fn write_residuals(
    dir: &Path,
    manifest_hash: &str,
    table: &NodeTable,
    predictions: &[f64],
    targets: &[f64],
    report: &EvalReport,
) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# manifest {manifest_hash}");
    out.push_str("node,group,measured_mm,predicted_mm,residual_mm\n");
    for (&node, residual) in report.eval_nodes.iter().zip(&report.residuals_mm) {
        let group = table.groups[node].map(|g| g.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{node},{group},{},{},{residual}", targets[node], predictions[node]);
    }
    write_string(&dir.join("residuals.csv"), &out)
}

/// `cv_table.csv`: the SVR grid-search table.
pub fn write_cv_table(dir: &Path, manifest_hash: &str, records: &[CvRecord]) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# manifest {manifest_hash}");
    out.push_str("C,gamma,epsilon,fold,mae_mm\n");
    for r in records {
        let _ = writeln!(out, "{},{},{},{},{}", r.c, r.gamma, r.epsilon, r.fold, r.mae_mm);
    }
    write_string(&dir.join("cv_table.csv"), &out)
}

/// Trend table: `axis_value,mean_mae_mm,std_mae_mm,n_seeds`.
pub fn write_trend_csv(path: &Path, rows: &[TrendRow]) -> Result<()> {
    let mut out = String::from("axis_value,mean_mae_mm,std_mae_mm,n_seeds\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.axis_value, r.mean_mae_mm, r.std_mae_mm, r.n_seeds);
    }
    write_string(path, &out)
}

/// Edge-list dump (`i j` per line) plus a JSON sidecar, for diffing and
/// external visualization.
pub fn write_graph_dump(
    dir: &Path,
    manifest_hash: &str,
    graph: &Graph,
    strategy: ConnectionStrategy,
    seed: u64,
) -> Result<()> {
    let mut out = String::new();
    for (i, j) in graph.edge_list() {
        let _ = writeln!(out, "{i} {j}");
    }
    write_string(&dir.join("graph.txt"), &out)?;
    #[derive(Serialize)]
    struct Sidecar {
        manifest_hash: String,
        n: usize,
        edges: usize,
        strategy: String,
        seed: u64,
    }
    let sidecar = Sidecar {
        manifest_hash: manifest_hash.to_string(),
        n: graph.n(),
        edges: graph.edge_count(),
        strategy: strategy.to_string(),
        seed,
    };
    write_string(&dir.join("graph.json"), &to_pretty_json(&sidecar, "graph sidecar")?)
}
