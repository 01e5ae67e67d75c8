//! MAE, residual diagnostics, trend aggregation, and transfer evaluation.
//!
//! Residual sign convention: `measured - predicted`, so over-prediction
//! gives a negative residual. MAE is reported in mm; the micrometre figure
//! is derived, never stored separately.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{row_normalize_features, NodeTable};
use crate::error::{Error, Result};
use crate::gcn::{self, GcnModel};
use crate::graph::{connect, normalize, ConnectionStrategy};

pub const DEFAULT_HISTOGRAM_BINS: usize = 21;

/// Equal-width residual histogram over `[lo, hi]`, symmetric around zero.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

/// Evaluation result over one node mask.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub mae_mm: f64,
    pub mae_um: f64,
    /// Per group tag, over eval nodes carrying that tag.
    pub group_mae_mm: BTreeMap<u32, f64>,
    /// `measured - predicted` per eval node, mm.
    pub residuals_mm: Vec<f64>,
    /// Node indices aligned with `residuals_mm`.
    pub eval_nodes: Vec<usize>,
    pub histogram: Histogram,
    pub n_eval: usize,
}

/// Mean absolute error `mean |y_v - z_v|` over the masked nodes, mm.
pub fn mae(predictions: &[f64], targets: &[f64], mask: &[usize]) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    if predictions.len() != targets.len() {
        return Err(Error::Dimension(format!(
            "{} predictions vs {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    let sum: f64 = mask.iter().map(|&v| libm::fabs(targets[v] - predictions[v])).sum();
    Ok(sum / mask.len() as f64)
}

/// Full residual report: residual vector, symmetric histogram, and per-group
/// MAE for every distinct group tag present among the eval nodes.
pub fn residual_report(
    predictions: &[f64],
    targets: &[f64],
    mask: &[usize],
    groups: &[Option<u32>],
    bins: usize,
) -> Result<EvalReport> {
    if bins < 1 {
        return Err(Error::Parameter("histogram needs at least one bin".into()));
    }
    let overall = mae(predictions, targets, mask)?;
    let residuals: Vec<f64> = mask.iter().map(|&v| targets[v] - predictions[v]).collect();

    let mut group_sum: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
    for (&v, r) in mask.iter().zip(&residuals) {
        if let Some(g) = groups.get(v).copied().flatten() {
            let entry = group_sum.entry(g).or_insert((0.0, 0));
            entry.0 += libm::fabs(*r);
            entry.1 += 1;
        }
    }
    let group_mae_mm =
        group_sum.into_iter().map(|(g, (s, c))| (g, s / c as f64)).collect::<BTreeMap<_, _>>();

    let radius = residuals.iter().map(|r| libm::fabs(*r)).fold(0.0, f64::max);
    let mut counts = vec![0u64; bins];
    if radius == 0.0 {
        counts[bins / 2] = residuals.len() as u64;
    } else {
        let lo = -radius;
        let width = 2.0 * radius / bins as f64;
        for &r in &residuals {
            let idx = ((r - lo) / width) as usize;
            counts[idx.min(bins - 1)] += 1;
        }
    }

    Ok(EvalReport {
        mae_mm: overall,
        mae_um: overall * 1000.0,
        group_mae_mm,
        n_eval: residuals.len(),
        eval_nodes: mask.to_vec(),
        residuals_mm: residuals,
        histogram: Histogram { lo: -radius, hi: radius, counts },
    })
}

/// Evaluates a frozen model on another table: builds the target graph with
/// the given strategy (no filtering), row-normalizes the target features,
/// predicts every node, and scores the labeled ones per group.
pub fn transfer_eval(
    model: &GcnModel,
    target: &NodeTable,
    strategy: ConnectionStrategy,
    bins: usize,
) -> Result<EvalReport> {
    target.validate()?;
    if target.d() != model.input_dim {
        return Err(Error::Dimension(format!(
            "model expects d = {}, target table has d = {}",
            model.input_dim,
            target.d()
        )));
    }
    let table = row_normalize_features(target);
    let graph = normalize(&connect(&table, strategy)?);
    let predictions = gcn::predict(model, &graph, &table.features)?;
    let mask = table.labeled_indices();
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let targets: Vec<f64> = table.labels.iter().map(|l| l.unwrap_or(0.0)).collect();
    residual_report(predictions.data(), &targets, &mask, &table.groups, bins)
}

/// One row of a trend table: MAE mean and spread at a grid-axis value.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrendRow {
    pub axis_value: f64,
    pub mean_mae_mm: f64,
    pub std_mae_mm: f64,
    pub n_seeds: usize,
}

/// Groups `(axis value, MAE)` points by exact axis value and returns mean
/// and sample standard deviation per value, sorted by axis value.
pub fn aggregate_trials(points: &[(f64, f64)]) -> Vec<TrendRow> {
    let mut by_axis: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
    for &(axis, mae) in points {
        by_axis.entry(axis.to_bits()).or_insert((axis, Vec::new())).1.push(mae);
    }
    let mut rows: Vec<TrendRow> = by_axis
        .into_values()
        .map(|(axis, maes)| {
            let n = maes.len();
            let mean = maes.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                let var =
                    maes.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (n - 1) as f64;
                libm::sqrt(var)
            } else {
                0.0
            };
            TrendRow { axis_value: axis, mean_mae_mm: mean, std_mae_mm: std, n_seeds: n }
        })
        .collect();
    rows.sort_by(|a, b| a.axis_value.total_cmp(&b.axis_value));
    rows
}
