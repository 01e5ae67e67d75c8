//! Node tables: the spatiotemporal surface-point dataset.
//!
//! A table row is one surface point: its 3D position (mm), the simulation
//! time step at which it was cut, a feature vector, an optional measured
//! shape-error label (mm), and an optional surface/group tag.
//!
//! The CSV text codec here is the wire format; file IO lives in the CLI
//! crate. Schema (optional header line beginning `id,`):
//!
//! ```text
//! id,time_step,x,y,z,f0,...,f{d-1},label,group
//! ```
//!
//! `label` and `group` cells may be empty. Values use a plain decimal point,
//! no thousands separators.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use core::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;
use crate::rng::{stream, Stream};

/// Per-node positions, time steps, features, optional labels and group tags.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NodeTable {
    pub positions: Vec<[f64; 3]>,
    pub time_steps: Vec<u32>,
    pub features: DenseMatrix,
    pub labels: Vec<Option<f64>>,
    pub groups: Vec<Option<u32>>,
}

impl NodeTable {
    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn d(&self) -> usize {
        self.features.cols()
    }

    pub fn labeled_indices(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| l.map(|_| i))
            .collect()
    }

    pub fn unlabeled_indices(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| if l.is_none() { Some(i) } else { None })
            .collect()
    }

    pub fn n_labeled(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }

    /// `|V_l| / |V_u|`; infinite when every node is labeled.
    pub fn labeled_ratio(&self) -> f64 {
        let l = self.n_labeled();
        let u = self.n() - l;
        if u == 0 {
            f64::INFINITY
        } else {
            l as f64 / u as f64
        }
    }

    /// New table keeping only `rows`, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> NodeTable {
        let d = self.d();
        let mut features = DenseMatrix::zeros(rows.len(), d);
        for (new_i, &old_i) in rows.iter().enumerate() {
            features.row_mut(new_i).copy_from_slice(self.features.row(old_i));
        }
        NodeTable {
            positions: rows.iter().map(|&i| self.positions[i]).collect(),
            time_steps: rows.iter().map(|&i| self.time_steps[i]).collect(),
            features,
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            groups: rows.iter().map(|&i| self.groups[i]).collect(),
        }
    }

    /// Checks the table invariants: consistent lengths, d >= 1, finite
    /// positions/features/labels, and non-empty.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.time_steps.len() != n
            || self.features.rows() != n
            || self.labels.len() != n
            || self.groups.len() != n
        {
            return Err(Error::Schema(format!(
                "column lengths disagree: {n} positions, {} steps, {} feature rows, {} labels, {} groups",
                self.time_steps.len(),
                self.features.rows(),
                self.labels.len(),
                self.groups.len()
            )));
        }
        if n == 0 {
            return Err(Error::Schema("table has no rows".into()));
        }
        if self.d() < 1 {
            return Err(Error::Schema("feature dimension must be >= 1".into()));
        }
        if self.positions.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("positions".into()));
        }
        self.features.ensure_finite("features")?;
        if self.labels.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("labels".into()));
        }
        Ok(())
    }

    /// Serializes to the CSV wire format, header included. Floats use the
    /// shortest representation that round-trips, so
    /// `from_csv_str(to_csv_string(t)) == t` exactly.
    pub fn to_csv_string(&self) -> String {
        let d = self.d();
        let mut out = String::new();
        out.push_str("id,time_step,x,y,z");
        for k in 0..d {
            let _ = write!(out, ",f{k}");
        }
        out.push_str(",label,group\n");
        for i in 0..self.n() {
            let p = self.positions[i];
            let _ = write!(out, "{i},{},{},{},{}", self.time_steps[i], p[0], p[1], p[2]);
            for &f in self.features.row(i) {
                let _ = write!(out, ",{f}");
            }
            match self.labels[i] {
                Some(l) => {
                    let _ = write!(out, ",{l}");
                }
                None => out.push(','),
            }
            match self.groups[i] {
                Some(g) => {
                    let _ = writeln!(out, ",{g}");
                }
                None => out.push_str(",\n"),
            }
        }
        out
    }

    /// Parses the CSV wire format. The header line is optional; `d` is
    /// inferred from the first data row and must be consistent thereafter.
    pub fn from_csv_str(text: &str) -> Result<NodeTable> {
        let mut positions = Vec::new();
        let mut time_steps = Vec::new();
        let mut feature_rows: Vec<Vec<f64>> = Vec::new();
        let mut labels = Vec::new();
        let mut groups = Vec::new();
        let mut d: Option<usize> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            if line_no == 1 && line.starts_with("id,") {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() < 7 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected at least 7 columns, got {}", cells.len()),
                });
            }
            let row_d = cells.len() - 7;
            match d {
                None => d = Some(row_d),
                Some(expected) if expected != row_d => {
                    return Err(Error::Schema(format!(
                        "row at line {line_no} has {row_d} features, expected {expected}"
                    )));
                }
                _ => {}
            }
            let parse_f64 = |cell: &str, what: &str| -> Result<f64> {
                cell.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("non-numeric {what} cell `{cell}`"),
                })
            };
            // id is validated but not stored; rows are identified by order.
            parse_f64(cells[0], "id")?;
            let step = cells[1].trim().parse::<u32>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("time_step `{}` is not a non-negative integer", cells[1]),
            })?;
            let x = parse_f64(cells[2], "x")?;
            let y = parse_f64(cells[3], "y")?;
            let z = parse_f64(cells[4], "z")?;
            let mut feats = Vec::with_capacity(row_d);
            for k in 0..row_d {
                feats.push(parse_f64(cells[5 + k], &format!("f{k}"))?);
            }
            let label_cell = cells[5 + row_d].trim();
            let label = if label_cell.is_empty() {
                None
            } else {
                Some(parse_f64(label_cell, "label")?)
            };
            let group_cell = cells[6 + row_d].trim();
            let group = if group_cell.is_empty() {
                None
            } else {
                Some(group_cell.parse::<u32>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("group `{group_cell}` is not a small non-negative integer"),
                })?)
            };
            positions.push([x, y, z]);
            time_steps.push(step);
            feature_rows.push(feats);
            labels.push(label);
            groups.push(group);
        }

        let features = DenseMatrix::from_rows(&feature_rows)?;
        let table = NodeTable { positions, time_steps, features, labels, groups };
        table.validate()?;
        Ok(table)
    }
}

/// Ground-truth field of a synthetic dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SyntheticField {
    /// Every node has the same shape error.
    Constant(f64),
    /// Affine in position.
    Linear,
    /// Two low-frequency sinusoids over position plus 0.3 times the first
    /// feature; neighbors share similar values, so graph smoothing helps.
    Smooth,
}

/// Recipe for a synthetic look-alike dataset with a known ground truth.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SyntheticSpec {
    pub n_time_steps: u32,
    pub points_per_step: u32,
    /// Feature dimension; at least 2 (one label-correlated component, the
    /// rest pure noise).
    pub d: u32,
    /// Fraction of nodes that keep their label, in (0, 1].
    pub label_ratio: f64,
    pub field: SyntheticField,
    /// Gaussian label noise, mm.
    pub noise_sd: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        if self.n_time_steps < 1 || self.points_per_step < 1 {
            return Err(Error::Parameter("n_time_steps and points_per_step must be >= 1".into()));
        }
        if self.d < 2 {
            return Err(Error::Parameter(
                "synthetic d must be >= 2 (signal feature plus noise feature)".into(),
            ));
        }
        if !(self.label_ratio > 0.0 && self.label_ratio <= 1.0) {
            return Err(Error::Parameter(format!(
                "label_ratio {} outside (0, 1]",
                self.label_ratio
            )));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::Parameter(format!("noise_sd {} must be >= 0", self.noise_sd)));
        }
        Ok(())
    }
}

const TWO_PI: f64 = core::f64::consts::TAU;
/// Spacing of the swept strips, mm.
const STEP_PITCH: f64 = 1.0;
const POINT_PITCH: f64 = 1.0;
/// Sinusoid amplitudes of the smooth field, mm. Unit-scale labels keep the
/// regression loss gradients well above the weight-decay pull; sub-mm
/// targets would need target scaling first.
const SMOOTH_AMP_X: f64 = 1.0;
const SMOOTH_AMP_Y: f64 = 0.6;
/// Noise on the label-correlated feature, in label units.
const SIGNAL_FEATURE_SD: f64 = 0.6;
/// Scale of the pure-noise features.
const NOISE_FEATURE_SD: f64 = 1.0;

/// Generates a synthetic table and returns the pre-mask label of every node
/// alongside it, so evaluation can score predictions on unlabeled nodes.
pub fn generate_synthetic_with_truth(spec: &SyntheticSpec) -> Result<(NodeTable, Vec<f64>)> {
    spec.validate()?;
    let n_steps = spec.n_time_steps as usize;
    let pps = spec.points_per_step as usize;
    let d = spec.d as usize;
    let n = n_steps * pps;

    let mut rng = stream(spec.seed, Stream::Synthetic);
    let signal_noise = Normal::new(0.0, SIGNAL_FEATURE_SD).expect("valid sd");
    let feature_noise = Normal::new(0.0, NOISE_FEATURE_SD).expect("valid sd");

    // Swept surface: each time step cuts one strip of points.
    let span_x = (n_steps.max(2) - 1) as f64 * STEP_PITCH;
    let span_y = (pps.max(2) - 1) as f64 * POINT_PITCH;
    let wavelength_x = 2.2 * span_x.max(4.0 * STEP_PITCH);
    let wavelength_y = 2.2 * span_y.max(4.0 * POINT_PITCH);

    let mut positions = Vec::with_capacity(n);
    let mut time_steps = Vec::with_capacity(n);
    let mut features = DenseMatrix::zeros(n, d);
    let mut truth = Vec::with_capacity(n);

    for s in 0..n_steps {
        let x = s as f64 * STEP_PITCH;
        for j in 0..pps {
            let y = j as f64 * POINT_PITCH;
            let z = 0.25 * libm::sin(0.35 * x) + 0.15 * libm::cos(0.4 * y);
            let v = positions.len();
            positions.push([x, y, z]);
            time_steps.push(s as u32);

            // First feature correlates with the label field; the rest are
            // pure noise. Draw order per node is fixed: f0, f1.., label noise.
            let (f0, t) = match spec.field {
                SyntheticField::Constant(c) => {
                    let f0 = feature_noise.sample(&mut rng);
                    (f0, c)
                }
                SyntheticField::Linear => {
                    let base = 0.2 * x + 0.3 * y - 0.1 * z + 0.4;
                    let f0 = base + signal_noise.sample(&mut rng);
                    (f0, base)
                }
                SyntheticField::Smooth => {
                    // centered over the sweep so the field is zero-mean
                    let s1 = SMOOTH_AMP_X * libm::sin(TWO_PI * (x - 0.5 * span_x) / wavelength_x);
                    let s2 = SMOOTH_AMP_Y * libm::sin(TWO_PI * (y - 0.5 * span_y) / wavelength_y);
                    let f0 = s1 + s2 + signal_noise.sample(&mut rng);
                    (f0, s1 + s2 + 0.3 * f0)
                }
            };
            features.set(v, 0, f0);
            for k in 1..d {
                features.set(v, k, feature_noise.sample(&mut rng));
            }
            let label = if spec.noise_sd > 0.0 {
                t + Normal::new(0.0, spec.noise_sd).expect("valid sd").sample(&mut rng)
            } else {
                t
            };
            truth.push(label);
        }
    }

    // Keep exactly round(label_ratio * n) labels, chosen by a seeded partial
    // shuffle.
    let n_labeled = (libm::round(spec.label_ratio * n as f64) as usize).clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();
    for i in 0..n_labeled {
        let j = rng.gen_range(i..n);
        order.swap(i, j);
    }
    let mut labeled = vec![false; n];
    for &i in &order[..n_labeled] {
        labeled[i] = true;
    }
    let labels = (0..n).map(|i| if labeled[i] { Some(truth[i]) } else { None }).collect();

    let table = NodeTable {
        positions,
        time_steps,
        features,
        labels,
        groups: vec![None; n],
    };
    table.validate()?;
    Ok((table, truth))
}

/// Synthetic table without the ground-truth vector.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<NodeTable> {
    generate_synthetic_with_truth(spec).map(|(t, _)| t)
}

/// Divides every feature row by its L1 norm (sum of absolute values); rows
/// with zero norm pass through unchanged. Returns a new table.
pub fn row_normalize_features(table: &NodeTable) -> NodeTable {
    let mut out = table.clone();
    for i in 0..out.n() {
        let row = out.features.row_mut(i);
        let norm: f64 = row.iter().map(|v| libm::fabs(*v)).sum();
        if norm > 0.0 {
            for v in row {
                *v /= norm;
            }
        }
    }
    out
}
