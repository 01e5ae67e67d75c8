//! Trial, grid, transfer, and re-aggregation runners.
//!
//! A trial executes dataset -> filter -> row-normalize -> connect ->
//! normalize -> train -> predict -> evaluate and writes its artifacts under
//! `<out_dir>/<manifest-hash-prefix>/`. Evaluation follows the protocol of
//! the config: `hidden_truth` scores unlabeled nodes against the synthetic
//! generator's pre-mask labels; `kfold` hides one fold of labeled nodes at
//! a time, retrains, and scores the held-out fold.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use shapegraph_core::dataset::{
    generate_synthetic_with_truth, row_normalize_features, NodeTable,
};
use shapegraph_core::eval::{self, aggregate_trials, EvalReport, TrendRow};
use shapegraph_core::gcn;
use shapegraph_core::graph::{connect, filter_nodes_indexed, normalize, ConnectionStrategy, Graph};
use shapegraph_core::numerics::DenseMatrix;
use shapegraph_core::svr::{self, CvRecord, SvrParams};

use crate::config::{
    DatasetSource, EvalProtocol, GridConfig, ModelKind, TransferConfig, TransferSource, TrialConfig,
};
use crate::error::{CliError, Result};
use crate::io::{
    self, Checkpoint, Timing, TrainSummary, TrialReport,
};
use crate::manifest::{DataStats, Manifest, ResolvedTrial};
use crate::plot::write_trend_svg;

/// How many hash characters name a trial directory.
const DIR_HASH_LEN: usize = 12;

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub dir: PathBuf,
    pub manifest_hash: String,
    pub seed: u64,
    pub mae_mm: f64,
    pub n_eval: usize,
}

/// Runs every seed of the config. With `jobs > 1`, seeds run on a local
/// thread pool; artifacts are independent either way.
pub fn run_trial(cfg: &TrialConfig, jobs: usize) -> Result<Vec<TrialOutcome>> {
    cfg.validate()?;
    run_many(cfg.seeds.iter().map(|&s| (cfg.clone(), s)).collect(), jobs)
        .into_iter()
        .map(|(_, r)| r)
        .collect()
}

fn run_many(
    cells: Vec<(TrialConfig, u64)>,
    jobs: usize,
) -> Vec<((TrialConfig, u64), Result<TrialOutcome>)> {
    if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("thread pool");
        pool.install(|| {
            cells
                .into_par_iter()
                .map(|(cfg, seed)| {
                    let result = run_trial_single(&cfg, seed);
                    ((cfg, seed), result)
                })
                .collect()
        })
    } else {
        cells
            .into_iter()
            .map(|(cfg, seed)| {
                let result = run_trial_single(&cfg, seed);
                ((cfg, seed), result)
            })
            .collect()
    }
}

/// Runs one (config, seed) cell. Artifacts are written into a `.partial`
/// sibling and moved into place on success, so a failed run never leaves
/// partial outputs and never clobbers an earlier successful run.
pub fn run_trial_single(cfg: &TrialConfig, seed: u64) -> Result<TrialOutcome> {
    cfg.validate()?;
    let resolved = ResolvedTrial::new(cfg, seed);
    let hash = resolved.hash()?;
    let prefix = &hash[..DIR_HASH_LEN];
    let final_dir = cfg.out_dir.join(prefix);
    let work_dir = cfg.out_dir.join(format!("{prefix}.partial"));
    let _ = std::fs::remove_dir_all(&work_dir);
    match execute(&resolved, &hash, &work_dir) {
        Ok(mut outcome) => {
            if final_dir.exists() {
                std::fs::remove_dir_all(&final_dir).map_err(CliError::io(&final_dir))?;
            }
            std::fs::rename(&work_dir, &final_dir).map_err(CliError::io(&final_dir))?;
            outcome.dir = final_dir;
            Ok(outcome)
        }
        Err(err) => {
            let _ = std::fs::remove_dir_all(&work_dir);
            Err(err)
        }
    }
}

struct ModelRun {
    predictions: Vec<f64>,
    targets: Vec<f64>,
    eval_mask: Vec<usize>,
    train: Option<TrainSummary>,
    svr_params: Option<SvrParams>,
    cv_records: Vec<CvRecord>,
    checkpoint: Checkpoint,
    train_seconds: Vec<f64>,
}

fn execute(resolved: &ResolvedTrial, hash: &str, dir: &Path) -> Result<TrialOutcome> {
    let cfg = &resolved.config;
    let seed = resolved.seed;
    let started = Instant::now();

    // dataset
    let (raw_table, truth) = match &cfg.dataset {
        DatasetSource::Csv(path) => (
            io::load_table(path).map_err(CliError::stage("dataset"))?,
            None,
        ),
        DatasetSource::Synthetic(spec) => {
            let (table, truth) =
                generate_synthetic_with_truth(spec).map_err(|e| stage_core("dataset", e))?;
            (table, Some(truth))
        }
    };

    // filter, then row-normalize features
    let (ftable, kept) =
        filter_nodes_indexed(&raw_table, cfg.filter_pct, cfg.min_per_step, seed)
            .map_err(|e| stage_core("filter", e))?;
    let table = row_normalize_features(&ftable);

    // graph
    let graph =
        normalize(&connect(&table, cfg.strategy).map_err(|e| stage_core("graph", e))?);

    let data = DataStats {
        n_nodes_raw: raw_table.n(),
        n_nodes: table.n(),
        n_labeled: table.n_labeled(),
        n_unlabeled: table.n() - table.n_labeled(),
        labeled_ratio: table.labeled_ratio(),
        d: table.d(),
        edges: graph.edge_count(),
    };

    // train + predict under the evaluation protocol
    let run = match cfg.eval_protocol() {
        EvalProtocol::HiddenTruth => {
            let truth = truth.ok_or_else(|| {
                CliError::Config("hidden_truth evaluation needs a synthetic dataset".into())
            })?;
            let targets: Vec<f64> = kept.iter().map(|&orig| truth[orig]).collect();
            run_hidden_truth(cfg, seed, &table, &graph, targets)
                .map_err(CliError::stage("model"))?
        }
        EvalProtocol::Kfold { k } => {
            run_kfold(cfg, seed, &table, &graph, k).map_err(CliError::stage("model"))?
        }
    };

    // evaluate
    let report = eval::residual_report(
        &run.predictions,
        &run.targets,
        &run.eval_mask,
        &table.groups,
        cfg.histogram_bins,
    )
    .map_err(|e| stage_core("evaluate", e))?;

    // artifacts
    write_artifacts(resolved, hash, dir, &table, &graph, &run, &report, data, started)
        .map_err(CliError::stage("write"))?;

    Ok(TrialOutcome {
        dir: dir.to_path_buf(),
        manifest_hash: hash.to_string(),
        seed,
        mae_mm: report.mae_mm,
        n_eval: report.n_eval,
    })
}

fn stage_core(stage: &'static str, err: shapegraph_core::Error) -> CliError {
    CliError::stage(stage)(err.into())
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(fold as u64 + 1)
}

fn train_gcn_timed(
    cfg: &TrialConfig,
    seed: u64,
    table: &NodeTable,
    graph: &Graph,
) -> Result<(gcn::GcnModel, gcn::TrainReport, f64)> {
    let mut model = gcn::init(table.d(), seed)?.with_params(cfg.train.clone());
    let t0 = Instant::now();
    let mut report = gcn::train(&mut model, graph, table)?;
    let secs = t0.elapsed().as_secs_f64();
    report.wall_seconds = secs;
    Ok((model, report, secs))
}

/// Feature rows the SVR sees: the row-normalized features, optionally with
/// raw positions appended.
fn svr_features(table: &NodeTable, use_positions: bool) -> DenseMatrix {
    if !use_positions {
        return table.features.clone();
    }
    let d = table.d();
    let mut out = DenseMatrix::zeros(table.n(), d + 3);
    for i in 0..table.n() {
        out.row_mut(i)[..d].copy_from_slice(table.features.row(i));
        out.row_mut(i)[d..].copy_from_slice(&table.positions[i]);
    }
    out
}

fn select_rows(x: &DenseMatrix, rows: &[usize]) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(rows.len(), x.cols());
    for (new_i, &old_i) in rows.iter().enumerate() {
        out.row_mut(new_i).copy_from_slice(x.row(old_i));
    }
    out
}

/// Train on the visible labels, score predictions for the unlabeled nodes
/// against the generator's hidden labels.
fn run_hidden_truth(
    cfg: &TrialConfig,
    seed: u64,
    table: &NodeTable,
    graph: &Graph,
    targets: Vec<f64>,
) -> Result<ModelRun> {
    let eval_mask = table.unlabeled_indices();
    if eval_mask.is_empty() {
        return Err(CliError::Data("no unlabeled nodes to evaluate against hidden truth".into()));
    }
    match cfg.model {
        ModelKind::Gcn => {
            let (model, report, secs) = train_gcn_timed(cfg, seed, table, graph)?;
            let predictions = gcn::predict(&model, graph, &table.features)?;
            Ok(ModelRun {
                predictions: predictions.data().to_vec(),
                targets,
                eval_mask,
                train: Some(TrainSummary {
                    final_losses: vec![*report.losses.last().unwrap_or(&f64::NAN)],
                    epochs: vec![report.epochs],
                    loss_curve: report.losses,
                }),
                svr_params: None,
                cv_records: Vec::new(),
                checkpoint: Checkpoint::Gcn { model },
                train_seconds: vec![secs],
            })
        }
        ModelKind::Svr => {
            let features = svr_features(table, cfg.svr.use_positions);
            let labeled = table.labeled_indices();
            let x_l = select_rows(&features, &labeled);
            let y_l: Vec<f64> = labeled.iter().map(|&i| table.labels[i].unwrap()).collect();
            let mut grid = cfg.svr.grid.clone();
            grid.seed = seed;
            let t0 = Instant::now();
            let (best, cv_records) = svr::grid_search_cv(&x_l, &y_l, &grid)?;
            let model = svr::fit(&x_l, &y_l, &best)?;
            let secs = t0.elapsed().as_secs_f64();
            let predictions = model.predict(&features)?;
            Ok(ModelRun {
                predictions,
                targets,
                eval_mask,
                train: None,
                svr_params: Some(best),
                cv_records,
                checkpoint: Checkpoint::Svr {
                    model,
                    params: best,
                    use_positions: cfg.svr.use_positions,
                },
                train_seconds: vec![secs],
            })
        }
    }
}

/// Hold out one fold of labeled nodes at a time, retrain, and score the
/// fold; the checkpointed model is trained on all labels afterwards.
fn run_kfold(
    cfg: &TrialConfig,
    seed: u64,
    table: &NodeTable,
    graph: &Graph,
    k: usize,
) -> Result<ModelRun> {
    let labeled = table.labeled_indices();
    if labeled.is_empty() {
        return Err(shapegraph_core::Error::NoLabels.into());
    }
    let folds = svr::kfold_indices(labeled.len(), k, seed)?;
    let targets: Vec<f64> = table.labels.iter().map(|l| l.unwrap_or(0.0)).collect();
    let mut predictions = vec![0.0; table.n()];
    let mut train_seconds = Vec::new();

    match cfg.model {
        ModelKind::Gcn => {
            let mut final_losses = Vec::new();
            let mut epochs = Vec::new();
            for (f, fold) in folds.iter().enumerate() {
                let fold_nodes: Vec<usize> = fold.iter().map(|&fi| labeled[fi]).collect();
                let mut hidden = table.clone();
                for &v in &fold_nodes {
                    hidden.labels[v] = None;
                }
                let (model, report, secs) =
                    train_gcn_timed(cfg, fold_seed(seed, f), &hidden, graph)?;
                train_seconds.push(secs);
                final_losses.push(*report.losses.last().unwrap_or(&f64::NAN));
                epochs.push(report.epochs);
                let fold_preds = gcn::predict(&model, graph, &table.features)?;
                for &v in &fold_nodes {
                    predictions[v] = fold_preds.get(v, 0);
                }
            }
            // final model on every label, for the checkpoint and transfer
            let (model, report, secs) = train_gcn_timed(cfg, seed, table, graph)?;
            train_seconds.push(secs);
            final_losses.push(*report.losses.last().unwrap_or(&f64::NAN));
            epochs.push(report.epochs);
            Ok(ModelRun {
                predictions,
                targets,
                eval_mask: labeled,
                train: Some(TrainSummary {
                    final_losses,
                    epochs,
                    loss_curve: report.losses,
                }),
                svr_params: None,
                cv_records: Vec::new(),
                checkpoint: Checkpoint::Gcn { model },
                train_seconds,
            })
        }
        ModelKind::Svr => {
            let features = svr_features(table, cfg.svr.use_positions);
            let x_l = select_rows(&features, &labeled);
            let y_l: Vec<f64> = labeled.iter().map(|&i| table.labels[i].unwrap()).collect();
            // grid search once per trial on the full labeled set; folds
            // below refit with the chosen cell
            let mut grid = cfg.svr.grid.clone();
            grid.seed = seed;
            let t0 = Instant::now();
            let (best, cv_records) = svr::grid_search_cv(&x_l, &y_l, &grid)?;
            for fold in &folds {
                let train_rows: Vec<usize> =
                    (0..labeled.len()).filter(|i| !fold.contains(i)).collect();
                let x_train = select_rows(&x_l, &train_rows);
                let y_train: Vec<f64> = train_rows.iter().map(|&i| y_l[i]).collect();
                let model = svr::fit(&x_train, &y_train, &best)?;
                for &fi in fold {
                    let v = labeled[fi];
                    predictions[v] = model.predict_one(features.row(v))?;
                }
            }
            let model = svr::fit(&x_l, &y_l, &best)?;
            train_seconds.push(t0.elapsed().as_secs_f64());
            Ok(ModelRun {
                predictions,
                targets,
                eval_mask: labeled,
                train: None,
                svr_params: Some(best),
                cv_records,
                checkpoint: Checkpoint::Svr {
                    model,
                    params: best,
                    use_positions: cfg.svr.use_positions,
                },
                train_seconds,
            })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn write_artifacts(
    resolved: &ResolvedTrial,
    hash: &str,
    dir: &Path,
    table: &NodeTable,
    graph: &Graph,
    run: &ModelRun,
    report: &EvalReport,
    data: DataStats,
    started: Instant,
) -> Result<()> {
    let cfg = &resolved.config;
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;

    let manifest = Manifest::new(resolved.clone(), data.clone())?;
    io::write_manifest(dir, &manifest)?;

    let trial_report = TrialReport {
        manifest_hash: hash.to_string(),
        seed: resolved.seed,
        model: cfg.model,
        strategy: cfg.strategy.to_string(),
        filter_pct: cfg.filter_pct,
        eval: report.clone(),
        data,
        train: run.train.clone(),
        svr_params: run.svr_params,
    };
    io::write_report(dir, &trial_report)?;
    io::write_residuals(dir, hash, table, &run.predictions, &run.targets, report)?;
    io::save_checkpoint(&dir.join("model.ckpt"), &run.checkpoint, Some(hash))?;
    if !run.cv_records.is_empty() {
        io::write_cv_table(dir, hash, &run.cv_records)?;
    }
    if cfg.dump_graph {
        io::write_graph_dump(dir, hash, graph, cfg.strategy, resolved.seed)?;
    }
    io::write_timing(
        dir,
        &Timing {
            manifest_hash: hash.to_string(),
            total_seconds: started.elapsed().as_secs_f64(),
            train_seconds: run.train_seconds.clone(),
        },
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// grid
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct GridSummary {
    pub total: usize,
    pub failed: usize,
    pub first_failure: Option<(String, i32)>,
    pub trend_files: Vec<PathBuf>,
    pub cells_csv: PathBuf,
}

/// Runs every (filter, strategy, seed) cell. Cell failures are recorded in
/// `failures.csv` and do not stop the sweep.
pub fn run_grid(cfg: &GridConfig, jobs: usize) -> Result<GridSummary> {
    cfg.validate()?;
    let cells: Vec<(TrialConfig, u64)> =
        cfg.cells().into_iter().map(|c| { let seed = c.seeds[0]; (c, seed) }).collect();
    let total = cells.len();
    let results = run_many(cells, jobs);

    let mut cells_out = String::from("filter_pct,strategy,seed,mae_mm,n_eval,trial_dir\n");
    let mut failures_out = String::from("filter_pct,strategy,seed,error\n");
    let mut failed = 0usize;
    let mut first_failure: Option<(String, i32)> = None;
    let mut k_points = Vec::new();
    let mut t_points = Vec::new();
    let mut filter_points = Vec::new();

    for ((cell, seed), result) in &results {
        match result {
            Ok(outcome) => {
                use std::fmt::Write as _;
                // hybrid strategies contain a comma, so the field is quoted
                let _ = writeln!(
                    cells_out,
                    "{},\"{}\",{seed},{},{},{}",
                    cell.filter_pct,
                    cell.strategy,
                    outcome.mae_mm,
                    outcome.n_eval,
                    outcome.dir.display()
                );
                match cell.strategy {
                    ConnectionStrategy::Knn { k } => k_points.push((k as f64, outcome.mae_mm)),
                    ConnectionStrategy::Temporal { t } => {
                        t_points.push((t as f64, outcome.mae_mm))
                    }
                    ConnectionStrategy::Hybrid { .. } => {}
                }
                filter_points.push((cell.filter_pct, outcome.mae_mm));
            }
            Err(err) => {
                use std::fmt::Write as _;
                failed += 1;
                let message = err.to_string().replace(',', ";").replace('\n', " ");
                let _ = writeln!(
                    failures_out,
                    "{},\"{}\",{seed},{message}",
                    cell.filter_pct, cell.strategy
                );
                if first_failure.is_none() {
                    first_failure = Some((err.to_string(), err.exit_code()));
                }
            }
        }
    }

    std::fs::create_dir_all(&cfg.out_dir).map_err(CliError::io(&cfg.out_dir))?;
    let cells_csv = cfg.out_dir.join("cells.csv");
    io::write_string(&cells_csv, &cells_out)?;
    if failed > 0 {
        io::write_string(&cfg.out_dir.join("failures.csv"), &failures_out)?;
    }

    let mut trend_files = Vec::new();
    let mut emit = |name: &str, title: &str, x_label: &str, points: &[(f64, f64)]| -> Result<()> {
        if points.is_empty() {
            return Ok(());
        }
        let rows = aggregate_trials(points);
        let csv = cfg.out_dir.join(format!("trend_{name}.csv"));
        io::write_trend_csv(&csv, &rows)?;
        let svg = cfg.out_dir.join(format!("trend_{name}.svg"));
        write_trend_svg(&svg, title, x_label, &rows)?;
        trend_files.push(csv);
        trend_files.push(svg);
        Ok(())
    };
    emit("k", "MAE vs connected neighbors", "K", &k_points)?;
    emit("t", "MAE vs connected time steps", "T", &t_points)?;
    if cfg.filters.len() > 1 {
        emit("filter", "MAE vs filter percentage", "filter [%]", &filter_points)?;
    }

    Ok(GridSummary { total, failed, first_failure, trend_files, cells_csv })
}

// ---------------------------------------------------------------------------
// transfer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransferReport {
    pub source: String,
    pub target: String,
    pub strategy: String,
    pub eval: EvalReport,
}

#[derive(Debug)]
pub struct TransferOutcome {
    pub dir: PathBuf,
    pub report: TransferReport,
}

/// Applies a frozen model to another geometry (no filtering) and reports
/// MAE per group.
pub fn run_transfer(cfg: &TransferConfig) -> Result<TransferOutcome> {
    let (checkpoint, source_name) = match &cfg.source {
        TransferSource::Checkpoint(path) => (io::load_checkpoint(path)?, path.display().to_string()),
        TransferSource::Trial(trial_cfg) => {
            let outcome = run_trial_single(trial_cfg, trial_cfg.seeds[0])?;
            let path = outcome.dir.join("model.ckpt");
            (io::load_checkpoint(&path)?, outcome.manifest_hash)
        }
    };
    let target = io::load_table(&cfg.target_csv).map_err(CliError::stage("target"))?;

    let eval_report = match &checkpoint {
        Checkpoint::Gcn { model } => {
            eval::transfer_eval(model, &target, cfg.strategy, cfg.histogram_bins)
                .map_err(|e| stage_core("transfer", e))?
        }
        Checkpoint::Svr { model, use_positions, .. } => {
            let normalized = row_normalize_features(&target);
            let features = svr_features(&normalized, *use_positions);
            let sv_dim = model.support_vectors.first().map(Vec::len).unwrap_or(features.cols());
            if sv_dim != features.cols() {
                return Err(CliError::Data(format!(
                    "checkpoint expects {} feature columns, target provides {}",
                    sv_dim,
                    features.cols()
                )));
            }
            let predictions = model.predict(&features).map_err(|e| stage_core("transfer", e))?;
            let mask = normalized.labeled_indices();
            let targets: Vec<f64> = normalized.labels.iter().map(|l| l.unwrap_or(0.0)).collect();
            eval::residual_report(&predictions, &targets, &mask, &normalized.groups, cfg.histogram_bins)
                .map_err(|e| stage_core("transfer", e))?
        }
    };

    let report = TransferReport {
        source: source_name,
        target: cfg.target_csv.display().to_string(),
        strategy: cfg.strategy.to_string(),
        eval: eval_report,
    };

    // directory named by the transfer config hash
    let value = serde_json::to_value(cfg)
        .map_err(|e| CliError::Config(format!("config not serializable: {e}")))?;
    let canonical = serde_json::to_string(&value)
        .map_err(|e| CliError::Config(format!("config not serializable: {e}")))?;
    use sha2::Digest as _;
    let hash = hex::encode(sha2::Sha256::digest(canonical.as_bytes()));
    let dir = cfg.out_dir.join(format!("transfer-{}", &hash[..DIR_HASH_LEN]));
    std::fs::create_dir_all(&dir).map_err(CliError::io(&dir))?;
    io::write_string(
        &dir.join("transfer_report.json"),
        &serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Data(format!("cannot serialize transfer report: {e}")))?,
    )?;

    Ok(TransferOutcome { dir, report })
}

// ---------------------------------------------------------------------------
// re-aggregation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    K,
    T,
    Filter,
}

impl Axis {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "k" => Ok(Axis::K),
            "t" => Ok(Axis::T),
            "filter" => Ok(Axis::Filter),
            other => Err(CliError::Config(format!("unknown axis `{other}` (k|t|filter)"))),
        }
    }

    fn label(self) -> &'static str {
        match self {
            Axis::K => "K",
            Axis::T => "T",
            Axis::Filter => "filter [%]",
        }
    }

    fn value(self, report: &TrialReport) -> Option<f64> {
        let strategy = ConnectionStrategy::parse(&report.strategy).ok()?;
        match (self, strategy) {
            (Axis::K, ConnectionStrategy::Knn { k }) => Some(k as f64),
            (Axis::K, ConnectionStrategy::Hybrid { k, .. }) => Some(k as f64),
            (Axis::T, ConnectionStrategy::Temporal { t }) => Some(t as f64),
            (Axis::T, ConnectionStrategy::Hybrid { t, .. }) => Some(t as f64),
            (Axis::Filter, _) => Some(report.filter_pct),
            _ => None,
        }
    }
}

/// Re-aggregates existing trial directories under `dir` along one grid
/// axis. Returns the trend rows and how many reports were used.
pub fn reaggregate(dir: &Path, axis: Axis, out: &Path) -> Result<(Vec<TrendRow>, usize)> {
    let entries = std::fs::read_dir(dir).map_err(CliError::io(dir))?;
    let mut points = Vec::new();
    for entry in entries {
        let entry = entry.map_err(CliError::io(dir))?;
        let path = entry.path();
        if !path.is_dir() || !path.join("report.json").exists() {
            continue;
        }
        let report = io::read_report(&path)?;
        if let Some(value) = axis.value(&report) {
            points.push((value, report.eval.mae_mm));
        }
    }
    if points.is_empty() {
        return Err(CliError::Data(format!(
            "no usable report.json under {} for this axis",
            dir.display()
        )));
    }
    let rows = aggregate_trials(&points);
    std::fs::create_dir_all(out).map_err(CliError::io(out))?;
    io::write_trend_csv(&out.join("trend.csv"), &rows)?;
    write_trend_svg(&out.join("trend.svg"), "MAE trend", axis.label(), &rows)?;
    Ok((rows, points.len()))
}
