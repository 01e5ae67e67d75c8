//! Epsilon-insensitive support vector regression with an RBF kernel.
//!
//! The dual is solved by SMO-style pairwise coordinate ascent on the
//! 2n-variable box problem: variables `z = [alpha; alpha*]` with signs
//! `u = [+1; -1]`, objective `1/2 z'Qz + p'z` where `Q_ij = u_i u_j K_ij`
//! and `p = [eps - y; eps + y]`, subject to `u'z = 0` and `0 <= z <= C`.
//! At each step the maximal-violating pair is updated analytically; the
//! solver stops when the KKT violation `m(z) - M(z)` drops below `tol`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;
use crate::rng::{stream, Stream};

/// `exp(-gamma * ||x - y||^2)`.
pub fn rbf_kernel(x: &[f64], y: &[f64], gamma: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "kernel inputs of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::Parameter(format!("gamma {gamma} must be > 0")));
    }
    let mut d2 = 0.0;
    for (a, b) in x.iter().zip(y) {
        let diff = a - b;
        d2 += diff * diff;
    }
    Ok(libm::exp(-gamma * d2))
}

/// Solver hyperparameters for one fit.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SvrParams {
    pub c: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvrParams {
    fn default() -> Self {
        SvrParams { c: 1.0, gamma: 0.1, epsilon: 0.01, tol: 1e-3, max_iter: 2_000_000 }
    }
}

/// Fitted model: support vectors, dual coefficients `alpha - alpha*`, bias.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SvrModel {
    pub support_vectors: Vec<Vec<f64>>,
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
    pub epsilon: f64,
    /// Final dual objective `1/2 z'Qz + p'z`, for solver verification.
    pub dual_objective: f64,
}

/// Fits epsilon-SVR on labeled rows `x` (n x d) with targets `y`.
pub fn fit(x: &DenseMatrix, y: &[f64], params: &SvrParams) -> Result<SvrModel> {
    let n = x.rows();
    if n != y.len() {
        return Err(Error::Dimension(format!("{n} rows vs {} targets", y.len())));
    }
    if n < 2 {
        return Err(Error::Parameter("SVR needs at least 2 labeled samples".into()));
    }
    if !params.c.is_finite() || params.c <= 0.0 || !params.epsilon.is_finite() || params.epsilon < 0.0 {
        return Err(Error::Parameter(format!(
            "C {} must be > 0 and epsilon {} must be >= 0",
            params.c, params.epsilon
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("SVR targets".into()));
    }
    x.ensure_finite("SVR features")?;

    // Precompute the kernel Gram matrix; labeled sets are desk scale.
    let mut kernel = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let k = rbf_kernel(x.row(i), x.row(j), params.gamma)?;
            kernel[i * n + j] = k;
            kernel[j * n + i] = k;
        }
    }

    let c = params.c;
    let two_n = 2 * n;
    let sign = |i: usize| if i < n { 1.0 } else { -1.0 };
    let mut z = vec![0.0; two_n];
    // gradient of the dual objective; starts at p since z = 0
    let mut grad: Vec<f64> = (0..two_n)
        .map(|i| if i < n { params.epsilon - y[i] } else { params.epsilon + y[i - n] })
        .collect();

    let mut violation = f64::INFINITY;
    let mut converged = false;
    for _ in 0..params.max_iter {
        // maximal violating pair: i maximizes -u_i g_i over I_up,
        // j minimizes it over I_low
        let mut i_sel = usize::MAX;
        let mut j_sel = usize::MAX;
        let mut m_up = f64::NEG_INFINITY;
        let mut m_low = f64::INFINITY;
        for idx in 0..two_n {
            let u = sign(idx);
            let v = -u * grad[idx];
            let in_up = if u > 0.0 { z[idx] < c } else { z[idx] > 0.0 };
            let in_low = if u > 0.0 { z[idx] > 0.0 } else { z[idx] < c };
            if in_up && v > m_up {
                m_up = v;
                i_sel = idx;
            }
            if in_low && v < m_low {
                m_low = v;
                j_sel = idx;
            }
        }
        violation = m_up - m_low;
        if violation < params.tol || i_sel == usize::MAX || j_sel == usize::MAX {
            converged = true;
            break;
        }

        let (i, j) = (i_sel, j_sel);
        let (ui, uj) = (sign(i), sign(j));
        let kij = |a: usize, b: usize| kernel[(a % n) * n + (b % n)];
        // curvature along the feasible direction d = u_i e_i - u_j e_j
        let mut eta = kij(i, i) + kij(j, j) - 2.0 * kij(i, j);
        if eta <= 0.0 {
            eta = 1e-12;
        }
        let mut t = (m_up - m_low) / eta;
        // box caps: z_i moves by +u_i t, z_j by -u_j t
        let cap_i = if ui > 0.0 { c - z[i] } else { z[i] };
        let cap_j = if uj > 0.0 { z[j] } else { c - z[j] };
        t = t.min(cap_i).min(cap_j);
        if t <= 0.0 {
            // numerically stuck pair; report the current violation
            break;
        }
        z[i] = (z[i] + ui * t).clamp(0.0, c);
        z[j] = (z[j] - uj * t).clamp(0.0, c);
        for (idx, g) in grad.iter_mut().enumerate() {
            *g += sign(idx) * t * (kij(idx, i) - kij(idx, j));
        }
    }
    if !converged && violation >= params.tol {
        return Err(Error::NonConvergence { violation });
    }

    // bias: average of -u_i g_i over free variables, else bound midpoint
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for idx in 0..two_n {
        let u = sign(idx);
        let v = -u * grad[idx];
        if z[idx] > 0.0 && z[idx] < c {
            free_sum += v;
            free_count += 1;
        } else {
            let in_up = if u > 0.0 { z[idx] < c } else { z[idx] > 0.0 };
            let in_low = if u > 0.0 { z[idx] > 0.0 } else { z[idx] < c };
            if in_up {
                lower = lower.max(v);
            }
            if in_low {
                upper = upper.min(v);
            }
        }
    }
    let bias = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        let lo = if lower.is_finite() { lower } else { upper };
        let hi = if upper.is_finite() { upper } else { lower };
        0.5 * (lo + hi)
    };

    let p_term: f64 = z
        .iter()
        .enumerate()
        .map(|(i, &zi)| {
            let p = if i < n { params.epsilon - y[i] } else { params.epsilon + y[i - n] };
            zi * p
        })
        .sum();
    // g = Qz + p, so z'Qz = z'(g - p) and the objective is (z'g + z'p) / 2
    let dual_objective =
        0.5 * z.iter().zip(&grad).map(|(&zi, &gi)| zi * gi).sum::<f64>() + 0.5 * p_term;

    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for i in 0..n {
        let beta = z[i] - z[n + i];
        if beta != 0.0 {
            support_vectors.push(x.row(i).to_vec());
            dual_coefs.push(beta);
        }
    }

    Ok(SvrModel {
        support_vectors,
        dual_coefs,
        bias,
        gamma: params.gamma,
        c: params.c,
        epsilon: params.epsilon,
        dual_objective,
    })
}

impl SvrModel {
    /// `f(x) = sum_i beta_i K(sv_i, x) + b` for one feature row.
    pub fn predict_one(&self, row: &[f64]) -> Result<f64> {
        let mut f = self.bias;
        for (sv, &beta) in self.support_vectors.iter().zip(&self.dual_coefs) {
            f += beta * rbf_kernel(sv, row, self.gamma)?;
        }
        Ok(f)
    }

    pub fn predict(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        (0..x.rows()).map(|i| self.predict_one(x.row(i))).collect()
    }
}

/// Hyperparameter grid plus fold count and fold seed. Defaults: the
/// 4 x 4 x 3 grid over C, gamma, epsilon with 5 folds.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct GridSpec {
    pub c: Vec<f64>,
    pub gamma: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            c: vec![0.1, 1.0, 10.0, 100.0],
            gamma: vec![0.01, 0.1, 1.0, 10.0],
            epsilon: vec![0.001, 0.01, 0.1],
            folds: 5,
            seed: 0,
        }
    }
}

/// One row of the cross-validation table.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CvRecord {
    pub c: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub fold: usize,
    pub mae_mm: f64,
}

/// Seeded k-fold split: a shuffled permutation of `0..n` chunked into k
/// folds whose sizes differ by at most one. The folds partition `0..n`.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Parameter(format!("fold count {k} must be >= 2")));
    }
    if n < k {
        return Err(Error::Parameter(format!("{n} samples cannot fill {k} folds")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = stream(seed, Stream::Folds);
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(order[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

/// Grid search with k-fold cross-validation over the labeled set. Returns
/// the parameters of the cell with the lowest mean validation MAE (ties go
/// to the first cell in C-major, gamma, epsilon order) and the full table.
pub fn grid_search_cv(
    x: &DenseMatrix,
    y: &[f64],
    spec: &GridSpec,
) -> Result<(SvrParams, Vec<CvRecord>)> {
    if spec.c.is_empty() || spec.gamma.is_empty() || spec.epsilon.is_empty() {
        return Err(Error::Parameter("grid lists must be nonempty".into()));
    }
    let n = x.rows();
    if n != y.len() {
        return Err(Error::Dimension(format!("{n} rows vs {} targets", y.len())));
    }
    let folds = kfold_indices(n, spec.folds, spec.seed)?;
    for fold in &folds {
        if n - fold.len() < 1 {
            return Err(Error::Parameter("a fold leaves no training samples".into()));
        }
    }

    let mut records = Vec::new();
    let mut best: Option<(f64, SvrParams)> = None;
    for &c in &spec.c {
        for &gamma in &spec.gamma {
            for &epsilon in &spec.epsilon {
                let params = SvrParams { c, gamma, epsilon, ..SvrParams::default() };
                let mut total = 0.0;
                for (f, fold) in folds.iter().enumerate() {
                    let train_rows: Vec<usize> = (0..n).filter(|i| !fold.contains(i)).collect();
                    let x_train = select(x, &train_rows);
                    let y_train: Vec<f64> = train_rows.iter().map(|&i| y[i]).collect();
                    let model = fit(&x_train, &y_train, &params)?;
                    let mut abs_sum = 0.0;
                    for &i in fold {
                        abs_sum += libm::fabs(y[i] - model.predict_one(x.row(i))?);
                    }
                    let mae = abs_sum / fold.len() as f64;
                    records.push(CvRecord { c, gamma, epsilon, fold: f, mae_mm: mae });
                    total += mae;
                }
                let mean = total / folds.len() as f64;
                if best.as_ref().is_none_or(|(b, _)| mean < *b) {
                    best = Some((mean, params));
                }
            }
        }
    }
    Ok((best.expect("nonempty grid").1, records))
}

fn select(x: &DenseMatrix, rows: &[usize]) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(rows.len(), x.cols());
    for (new_i, &old_i) in rows.iter().enumerate() {
        out.row_mut(new_i).copy_from_slice(x.row(old_i));
    }
    out
}
