//! Acceptance suite. Each criterion runs as one test and prints a
//! `ACCEPTANCE <id> PASS|FAIL|SKIP` line (visible with `--nocapture`).
//!
//! B1-B8 run against synthetic data and built-in oracles. A1-A3 need the
//! published machining dataset converted to the documented CSV schema; set
//! `SHAPEGRAPH_DATASET_DIR` to a directory holding `train.csv` and
//! `transfer.csv` to enable them, otherwise they report SKIP.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shapegraph_cli::config::{
    DatasetSource, FilterSpec, GridConfig, ModelKind, SvrSettings, TransferConfig, TransferSource,
    TrialConfig,
};
use shapegraph_cli::io;
use shapegraph_cli::trial::{run_grid, run_transfer, run_trial_single};
use shapegraph_core::dataset::{
    generate_synthetic_with_truth, row_normalize_features, NodeTable, SyntheticField, SyntheticSpec,
};
use shapegraph_core::eval::mae;
use shapegraph_core::gcn::{self, TrainParams};
use shapegraph_core::graph::{connect, connect_knn, normalize, ConnectionStrategy, Graph};
use shapegraph_core::numerics::DenseMatrix;
use shapegraph_core::svr::{self, SvrParams};

fn verdict(id: &str, pass: bool, detail: &str) {
    println!("ACCEPTANCE {id} {} - {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{id}: {detail}");
}

fn skip(id: &str, why: &str) {
    println!("ACCEPTANCE {id} SKIP - {why}");
}

// ---------------------------------------------------------------------------
// B1: end-to-end gradient correctness
// ---------------------------------------------------------------------------

#[test]
fn b1_gradients_match_finite_differences() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4001);
    let n = 12;
    let d = 4;
    let positions: Vec<[f64; 3]> = (0..n)
        .map(|_| [rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0), rng.gen_range(0.0..2.0)])
        .collect();
    let table = NodeTable {
        positions,
        time_steps: vec![0; n],
        features: DenseMatrix::glorot_uniform(n, d, &mut rng),
        labels: (0..n)
            .map(|i| if i % 3 == 0 { Some(rng.gen_range(-1.0..1.0)) } else { None })
            .collect(),
        groups: vec![None; n],
    };
    let graph = normalize(&connect_knn(&table, 3).unwrap());
    let targets: Vec<f64> = table.labels.iter().map(|l| l.unwrap_or(0.0)).collect();
    let mask = table.labeled_indices();
    let mut model = gcn::init(d, 404).unwrap();
    let (_, grads) =
        gcn::loss_and_gradients(&model, &graph, &table.features, &targets, &mask, None).unwrap();

    let h = 1e-6;
    let x = table.features.clone();
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    let mut probe = |model: &mut gcn::GcnModel, tensor: usize, idx: usize, analytic: f64| {
        let read = |m: &gcn::GcnModel| match tensor {
            0..=2 => m.gcn_weights[tensor].data()[idx],
            3 => m.mlp_weight.data()[idx],
            _ => m.mlp_bias,
        };
        let write = |m: &mut gcn::GcnModel, v: f64| match tensor {
            0..=2 => m.gcn_weights[tensor].data_mut()[idx] = v,
            3 => m.mlp_weight.data_mut()[idx] = v,
            _ => m.mlp_bias = v,
        };
        let orig = read(model);
        write(model, orig + h);
        let up = gcn::labeled_loss(model, &graph, &x, &targets, &mask).unwrap();
        write(model, orig - h);
        let down = gcn::labeled_loss(model, &graph, &x, &targets, &mask).unwrap();
        write(model, orig);
        let fd = (up - down) / (2.0 * h);
        let denom = fd.abs().max(analytic.abs());
        // 1e-5 relative plus the finite-difference noise floor eps*|L|/h
        assert!(
            (fd - analytic).abs() < 1e-5 * denom + 1e-9,
            "tensor {tensor} idx {idx}: fd {fd} vs analytic {analytic}"
        );
        if denom > 1e-4 {
            worst = worst.max((fd - analytic).abs() / denom);
            checked += 1;
        }
    };
    for l in 0..3 {
        for idx in 0..grads.gcn[l].data().len() {
            let g = grads.gcn[l].data()[idx];
            probe(&mut model, l, idx, g);
        }
    }
    for idx in 0..grads.mlp.data().len() {
        probe(&mut model, 3, idx, grads.mlp.data()[idx]);
    }
    probe(&mut model, 4, 0, grads.bias);

    let elapsed = started.elapsed().as_secs_f64();
    verdict(
        "B1",
        worst < 1e-5 && elapsed < 5.0,
        &format!("worst relative gradient error {worst:.2e} over {checked} healthy entries, {elapsed:.2}s (< 5s)"),
    );
}

// ---------------------------------------------------------------------------
// B2: normalization against a dense oracle
// ---------------------------------------------------------------------------

#[test]
fn b2_normalization_matches_dense_oracle_on_100_graphs() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4002);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(2..=50);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen::<f64>() < 0.15 {
                    edges.push((i, j));
                }
            }
        }
        let graph = Graph::from_edges(n, &edges).unwrap();
        let norm = normalize(&graph);
        let sparse = norm.norm_adjacency().unwrap().to_dense();

        let mut a_tilde = DenseMatrix::zeros(n, n);
        for i in 0..n {
            a_tilde.set(i, i, 1.0);
        }
        for &(i, j) in &edges {
            a_tilde.set(i, j, 1.0);
            a_tilde.set(j, i, 1.0);
        }
        let deg: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a_tilde.get(i, j)).sum()).collect();
        let mut reference = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if a_tilde.get(i, j) != 0.0 {
                    reference.set(i, j, 1.0 / (deg[i] * deg[j]).sqrt());
                }
            }
        }
        worst = worst.max(sparse.max_abs_diff(&reference));
    }
    let elapsed = started.elapsed().as_secs_f64();
    verdict(
        "B2",
        worst < 1e-12 && elapsed < 5.0,
        &format!("max |entry - oracle| = {worst:.2e} over 100 graphs (n <= 50), {elapsed:.2}s (< 5s)"),
    );
}

// ---------------------------------------------------------------------------
// B3: kNN against brute force
// ---------------------------------------------------------------------------

#[test]
fn b3_knn_equals_brute_force_on_50_clouds() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4003);
    for trial in 0..50 {
        let n = 200;
        let mut points: Vec<[f64; 3]> = (0..n)
            .map(|_| {
                [rng.gen_range(0.0..20.0), rng.gen_range(0.0..20.0), rng.gen_range(0.0..5.0)]
            })
            .collect();
        if trial % 10 == 0 {
            points[17] = points[3];
        }
        let table = NodeTable {
            positions: points.clone(),
            time_steps: vec![0; n],
            features: DenseMatrix::zeros(n, 1),
            labels: vec![None; n],
            groups: vec![None; n],
        };
        let k = rng.gen_range(3..=8);
        let fast = connect_knn(&table, k).unwrap().edge_list();

        let mut brute = std::collections::BTreeSet::new();
        for i in 0..n {
            let mut cands: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let dx = points[i][0] - points[j][0];
                    let dy = points[i][1] - points[j][1];
                    let dz = points[i][2] - points[j][2];
                    (dx * dx + dy * dy + dz * dz, j)
                })
                .collect();
            cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for &(_, j) in cands.iter().take(k) {
                brute.insert((i.min(j), i.max(j)));
            }
        }
        let brute: Vec<(usize, usize)> = brute.into_iter().collect();
        assert_eq!(fast, brute, "cloud {trial} with k = {k}");
    }
    let elapsed = started.elapsed().as_secs_f64();
    verdict("B3", elapsed < 10.0, &format!("50 clouds x 200 points exact, {elapsed:.2}s (< 10s)"));
}

// ---------------------------------------------------------------------------
// B4: semi-supervised lift over the labeled-mean predictor
// ---------------------------------------------------------------------------

fn smooth_spec(points_per_step: u32, seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        n_time_steps: 20,
        points_per_step,
        d: 4,
        label_ratio: 0.065,
        field: SyntheticField::Smooth,
        noise_sd: 0.05,
        seed,
    }
}

fn gcn_unlabeled_mae(spec: &SyntheticSpec, strategy: ConnectionStrategy, seed: u64) -> (f64, f64) {
    let (raw, truth) = generate_synthetic_with_truth(spec).unwrap();
    let table = row_normalize_features(&raw);
    let graph = normalize(&connect(&table, strategy).unwrap());
    let mut model = gcn::init(table.d() as usize, seed).unwrap().with_params(TrainParams::default());
    gcn::train(&mut model, &graph, &table).unwrap();
    let preds = gcn::predict(&model, &graph, &table.features).unwrap();
    let unlabeled = table.unlabeled_indices();
    let gcn_mae = mae(preds.data(), &truth, &unlabeled).unwrap();

    let labeled = table.labeled_indices();
    let labeled_mean = labeled.iter().map(|&i| truth[i]).sum::<f64>() / labeled.len() as f64;
    let mean_preds = vec![labeled_mean; table.n()];
    let mean_mae = mae(&mean_preds, &truth, &unlabeled).unwrap();
    (gcn_mae, mean_mae)
}

#[test]
fn b4_gcn_beats_labeled_mean_on_smooth_field() {
    let started = Instant::now();
    let mut wins = 0;
    let mut details = Vec::new();
    for seed in 1..=10u64 {
        let spec = smooth_spec(50, seed);
        let (gcn_mae, mean_mae) = gcn_unlabeled_mae(&spec, ConnectionStrategy::Knn { k: 8 }, seed);
        let lift = 1.0 - gcn_mae / mean_mae;
        if lift >= 0.30 {
            wins += 1;
        }
        details.push(format!("{:.0}%", lift * 100.0));
    }
    let elapsed = started.elapsed().as_secs_f64();
    verdict(
        "B4",
        wins >= 8 && elapsed < 120.0,
        &format!("lift >= 30% in {wins}/10 seeds (need >= 8): [{}], {elapsed:.1}s (< 120s)", details.join(", ")),
    );
}

// ---------------------------------------------------------------------------
// B5/B6: trend directions over 10 seeds
// ---------------------------------------------------------------------------

fn mean_mae_over_seeds(strategy: ConnectionStrategy) -> f64 {
    let mut total = 0.0;
    for seed in 1..=10u64 {
        let spec = smooth_spec(30, seed);
        let (gcn_mae, _) = gcn_unlabeled_mae(&spec, strategy, seed);
        total += gcn_mae;
    }
    total / 10.0
}

#[test]
fn b5_more_neighbors_do_not_hurt() {
    let started = Instant::now();
    let k3 = mean_mae_over_seeds(ConnectionStrategy::Knn { k: 3 });
    let k8 = mean_mae_over_seeds(ConnectionStrategy::Knn { k: 8 });
    let elapsed = started.elapsed().as_secs_f64();
    verdict(
        "B5",
        k8 <= k3,
        &format!("mean MAE K=8 {k8:.4} <= K=3 {k3:.4} over 10 seeds, {elapsed:.1}s"),
    );
}

#[test]
fn b6_temporal_window_of_three_does_not_hurt() {
    let started = Instant::now();
    let t1 = mean_mae_over_seeds(ConnectionStrategy::Temporal { t: 1 });
    let t3 = mean_mae_over_seeds(ConnectionStrategy::Temporal { t: 3 });
    let elapsed = started.elapsed().as_secs_f64();
    verdict(
        "B6",
        t3 <= t1,
        &format!("mean MAE T=3 {t3:.4} <= T=1 {t1:.4} over 10 seeds, {elapsed:.1}s"),
    );
}

// ---------------------------------------------------------------------------
// B7: SMO against a dense-QP oracle, plus KKT residuals
// ---------------------------------------------------------------------------

/// Projected-gradient reference solver for the 2n-variable SVR dual (see
/// `svr` module docs for the formulation).
struct DualOracle {
    n: usize,
    kernel: Vec<f64>,
    p: Vec<f64>,
    c: f64,
}

impl DualOracle {
    fn new(x: &DenseMatrix, y: &[f64], params: &SvrParams) -> Self {
        let n = x.rows();
        let mut kernel = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                kernel[i * n + j] = svr::rbf_kernel(x.row(i), x.row(j), params.gamma).unwrap();
            }
        }
        let p = (0..2 * n)
            .map(|i| if i < n { params.epsilon - y[i] } else { params.epsilon + y[i - n] })
            .collect();
        DualOracle { n, kernel, p, c: params.c }
    }

    fn sign(&self, i: usize) -> f64 {
        if i < self.n {
            1.0
        } else {
            -1.0
        }
    }

    fn k(&self, a: usize, b: usize) -> f64 {
        self.kernel[(a % self.n) * self.n + (b % self.n)]
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let m = 2 * self.n;
        (0..m)
            .map(|i| {
                let mut g = self.p[i];
                for j in 0..m {
                    if z[j] != 0.0 {
                        g += self.sign(i) * self.sign(j) * self.k(i, j) * z[j];
                    }
                }
                g
            })
            .collect()
    }

    fn objective(&self, z: &[f64]) -> f64 {
        let g = self.gradient(z);
        0.5 * z.iter().zip(&g).map(|(zi, gi)| zi * gi).sum::<f64>()
            + 0.5 * z.iter().zip(&self.p).map(|(zi, pi)| zi * pi).sum::<f64>()
    }

    fn project(&self, w: &[f64]) -> Vec<f64> {
        let m = 2 * self.n;
        let value = |mu: f64| -> f64 {
            (0..m).map(|i| self.sign(i) * (w[i] - mu * self.sign(i)).clamp(0.0, self.c)).sum()
        };
        let bound = self.c + w.iter().fold(0.0f64, |a, &v| a.max(v.abs())) + 1.0;
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if value(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mu = 0.5 * (lo + hi);
        (0..m).map(|i| (w[i] - mu * self.sign(i)).clamp(0.0, self.c)).collect()
    }

    fn solve(&self, iters: usize) -> Vec<f64> {
        let m = 2 * self.n;
        let lips = (0..m).map(|i| (0..m).map(|j| self.k(i, j)).sum::<f64>()).fold(1.0f64, f64::max);
        let step = 1.0 / lips;
        let mut z = vec![0.0; m];
        let mut momentum = z.clone();
        let mut t_prev = 1.0f64;
        for _ in 0..iters {
            let g = self.gradient(&momentum);
            let w: Vec<f64> = momentum.iter().zip(&g).map(|(zi, gi)| zi - step * gi).collect();
            let z_next = self.project(&w);
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_prev * t_prev).sqrt());
            let coeff = (t_prev - 1.0) / t_next;
            momentum = z_next.iter().zip(&z).map(|(a, b)| a + coeff * (a - b)).collect();
            z = z_next;
            t_prev = t_next;
        }
        z
    }
}

/// Stationarity violation of a fitted model, recomputed from scratch: the
/// gap `m(z) - M(z)` of the maximal violating pair, with `alpha`/`alpha*`
/// reconstructed from the signed dual coefficients.
fn kkt_violation(x: &DenseMatrix, y: &[f64], params: &SvrParams, model: &svr::SvrModel) -> f64 {
    let n = x.rows();
    let mut beta = vec![0.0; n];
    let mut sv = model.support_vectors.iter().zip(&model.dual_coefs);
    let mut current = sv.next();
    for i in 0..n {
        if let Some((row, &coef)) = current {
            if row.as_slice() == x.row(i) {
                beta[i] = coef;
                current = sv.next();
            }
        }
    }
    let kb: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| beta[j] * svr::rbf_kernel(x.row(i), x.row(j), params.gamma).unwrap())
                .sum()
        })
        .collect();
    let mut m_up = f64::NEG_INFINITY;
    let mut m_low = f64::INFINITY;
    for idx in 0..2 * n {
        let i = idx % n;
        let (u, z, g) = if idx < n {
            (1.0, beta[i].max(0.0), kb[i] + params.epsilon - y[i])
        } else {
            (-1.0, (-beta[i]).max(0.0), -kb[i] + params.epsilon + y[i])
        };
        let v = -u * g;
        let in_up = if u > 0.0 { z < params.c } else { z > 0.0 };
        let in_low = if u > 0.0 { z > 0.0 } else { z < params.c };
        if in_up {
            m_up = m_up.max(v);
        }
        if in_low {
            m_low = m_low.min(v);
        }
    }
    m_up - m_low
}

#[test]
fn b7_smo_matches_dense_qp_oracle() {
    let started = Instant::now();
    let mut worst_rel = 0.0f64;
    let mut worst_kkt = f64::NEG_INFINITY;
    for (seed, n) in [(21u64, 10usize), (22, 18), (23, 25), (24, 30)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> =
            (0..n).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| 0.4 * (2.0 * r[0]).sin() - 0.3 * r[1] + 0.05 * rng.gen_range(-1.0..1.0))
            .collect();
        let x = DenseMatrix::from_rows(&rows).unwrap();
        let params =
            SvrParams { c: 5.0, gamma: 1.5, epsilon: 0.02, tol: 1e-4, ..SvrParams::default() };
        let model = svr::fit(&x, &y, &params).unwrap();

        let oracle = DualOracle::new(&x, &y, &params);
        let reference = oracle.objective(&oracle.solve(40_000));
        let rel = (model.dual_objective - reference).abs() / reference.abs().max(1e-10);
        worst_rel = worst_rel.max(rel);
        worst_kkt = worst_kkt.max(kkt_violation(&x, &y, &params, &model));
    }
    let elapsed = started.elapsed().as_secs_f64();
    verdict(
        "B7",
        worst_rel < 1e-4 && worst_kkt < 1e-3,
        &format!("worst objective gap {worst_rel:.2e} (< 1e-4), worst KKT violation {worst_kkt:.2e} (< 1e-3), {elapsed:.1}s"),
    );
}

// ---------------------------------------------------------------------------
// B8: byte-identical artifacts from the binary
// ---------------------------------------------------------------------------

#[test]
fn b8_binary_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("trial.json");
    std::fs::write(
        &cfg_path,
        format!(
            r#"{{
  "dataset": {{"synthetic": {{"n_time_steps": 10, "points_per_step": 10, "d": 4,
               "label_ratio": 0.1, "field": "smooth", "noise_sd": 0.02, "seed": 0}}}},
  "strategy": "knn:8",
  "model": "gcn",
  "train": {{"max_epochs": 80}},
  "seeds": [3],
  "out_dir": {:?}
}}"#,
            dir.path().join("runs")
        ),
    )
    .unwrap();
    let bin = env!("CARGO_BIN_EXE_shapegraph");
    let run = || {
        let output = Command::new(bin).args(["trial", "--config"]).arg(&cfg_path).output().unwrap();
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    };
    run();
    let trial_dir = std::fs::read_dir(dir.path().join("runs"))
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let report1 = std::fs::read(trial_dir.join("report.json")).unwrap();
    let residuals1 = std::fs::read(trial_dir.join("residuals.csv")).unwrap();
    run();
    let report2 = std::fs::read(trial_dir.join("report.json")).unwrap();
    let residuals2 = std::fs::read(trial_dir.join("residuals.csv")).unwrap();
    let pass = report1 == report2 && residuals1 == residuals2;
    verdict(
        "B8",
        pass,
        &format!(
            "report.json ({} bytes) and residuals.csv ({} bytes) identical across reruns",
            report1.len(),
            residuals1.len()
        ),
    );
}

// ---------------------------------------------------------------------------
// A1-A3: published-dataset criteria (gated)
// ---------------------------------------------------------------------------

fn dataset_dir() -> Option<PathBuf> {
    let dir = PathBuf::from(std::env::var_os("SHAPEGRAPH_DATASET_DIR")?);
    if dir.join("train.csv").exists() {
        Some(dir)
    } else {
        None
    }
}

fn published_trial(dir: &PathBuf, out: PathBuf, model: ModelKind, filter_pct: f64, min_per_step: usize) -> TrialConfig {
    TrialConfig {
        dataset: DatasetSource::Csv(dir.join("train.csv")),
        filter_pct,
        min_per_step,
        strategy: ConnectionStrategy::Knn { k: 8 },
        model,
        train: TrainParams::default(),
        svr: SvrSettings::default(),
        seeds: vec![0],
        out_dir: out,
        eval: None,
        histogram_bins: 21,
        dump_graph: false,
    }
}

#[test]
fn a1_published_gcn_mae_in_band() {
    let Some(data) = dataset_dir() else {
        skip("A1", "published dataset not available (set SHAPEGRAPH_DATASET_DIR)");
        return;
    };
    let started = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let cfg = published_trial(&data, tmp.path().to_path_buf(), ModelKind::Gcn, 10.0, 5);
    let outcome = run_trial_single(&cfg, 0).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let pass = (0.005..=0.014).contains(&outcome.mae_mm) && elapsed < 600.0;
    verdict(
        "A1",
        pass,
        &format!("GCN (10% filter, K=8) MAE {:.4} mm in [0.005, 0.014], {elapsed:.0}s (< 600s)", outcome.mae_mm),
    );
}

#[test]
fn a2_published_svr_band_and_gcn_wins() {
    let Some(data) = dataset_dir() else {
        skip("A2", "published dataset not available (set SHAPEGRAPH_DATASET_DIR)");
        return;
    };
    let tmp = tempfile::tempdir().unwrap();
    let gcn_cfg = published_trial(&data, tmp.path().to_path_buf(), ModelKind::Gcn, 10.0, 5);
    let gcn_mae = run_trial_single(&gcn_cfg, 0).unwrap().mae_mm;
    let svr_cfg = published_trial(&data, tmp.path().to_path_buf(), ModelKind::Svr, 10.0, 5);
    let svr_mae = run_trial_single(&svr_cfg, 0).unwrap().mae_mm;
    let band = (svr_mae - 0.0124).abs() <= 0.3 * 0.0124;
    verdict(
        "A2",
        band && gcn_mae < svr_mae,
        &format!("SVR MAE {svr_mae:.4} mm within 30% of 0.0124 and GCN {gcn_mae:.4} < SVR"),
    );
}

#[test]
fn a3_published_transfer_ordering() {
    let Some(data) = dataset_dir() else {
        skip("A3", "published dataset not available (set SHAPEGRAPH_DATASET_DIR)");
        return;
    };
    if !data.join("transfer.csv").exists() {
        skip("A3", "transfer.csv not present in SHAPEGRAPH_DATASET_DIR");
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let mut transfer_maes = Vec::new();
    let mut training_maes = Vec::new();
    for (filter, min) in [(10.0, 5usize), (99.0, 1)] {
        let cfg = published_trial(&data, tmp.path().to_path_buf(), ModelKind::Gcn, filter, min);
        let outcome = run_trial_single(&cfg, 0).unwrap();
        training_maes.push(outcome.mae_mm);
        let transfer = run_transfer(&TransferConfig {
            source: TransferSource::Checkpoint(outcome.dir.join("model.ckpt")),
            target_csv: data.join("transfer.csv"),
            strategy: ConnectionStrategy::Knn { k: 8 },
            out_dir: tmp.path().join("transfer"),
            histogram_bins: 21,
        })
        .unwrap();
        transfer_maes.push(transfer.report.eval.mae_mm);
    }
    let svr_cfg = published_trial(&data, tmp.path().to_path_buf(), ModelKind::Svr, 10.0, 5);
    let svr_outcome = run_trial_single(&svr_cfg, 0).unwrap();
    let svr_transfer = run_transfer(&TransferConfig {
        source: TransferSource::Checkpoint(svr_outcome.dir.join("model.ckpt")),
        target_csv: data.join("transfer.csv"),
        strategy: ConnectionStrategy::Knn { k: 8 },
        out_dir: tmp.path().join("transfer"),
        histogram_bins: 21,
    })
    .unwrap()
    .report
    .eval
    .mae_mm;

    let degradation = transfer_maes
        .iter()
        .zip(&training_maes)
        .all(|(t, tr)| *t >= 2.0 * tr);
    let svr_wins_transfer = transfer_maes.iter().all(|t| svr_transfer < *t);
    verdict(
        "A3",
        degradation && svr_wins_transfer,
        &format!(
            "GCN transfer {:?} >= 2x training {:?}; SVR transfer {svr_transfer:.4} below both",
            transfer_maes, training_maes
        ),
    );
}

// ---------------------------------------------------------------------------
// sanity: the full grid runner stays usable at acceptance scale
// ---------------------------------------------------------------------------

#[test]
fn grid_runner_smoke_under_acceptance_settings() {
    let dir = tempfile::tempdir().unwrap();
    let grid = GridConfig {
        dataset: DatasetSource::Synthetic(smooth_spec(10, 0)),
        model: ModelKind::Gcn,
        filters: vec![FilterSpec { pct: 0.0, min_per_step: 5 }, FilterSpec { pct: 50.0, min_per_step: 5 }],
        strategies: vec![ConnectionStrategy::Knn { k: 3 }, ConnectionStrategy::Hybrid { k: 3, t: 2 }],
        train: TrainParams { max_epochs: 30, ..TrainParams::default() },
        svr: SvrSettings::default(),
        seeds: vec![1, 2],
        out_dir: dir.path().join("grid"),
        eval: None,
        histogram_bins: 21,
    };
    let summary = run_grid(&grid, 1).unwrap();
    assert_eq!(summary.total, 8);
    assert_eq!(summary.failed, 0);
    assert!(dir.path().join("grid/trend_filter.csv").exists());
    let report_dirs = std::fs::read_dir(dir.path().join("grid")).unwrap().count();
    assert!(report_dirs >= 9, "expected trial dirs plus grid outputs, saw {report_dirs}");
    let one = std::fs::read_dir(dir.path().join("grid"))
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .find(|p| p.is_dir())
        .unwrap();
    let report = io::read_report(&one).unwrap();
    assert!(report.eval.mae_mm.is_finite());
}
