use alloc::format;
use alloc::vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// Elementwise `max(0, x)`. Returns the activated matrix and a 0/1 mask for
/// the backward pass; the gradient at exactly 0 is 0.
pub fn relu(x: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let mut out = x.clone();
    let mut mask = DenseMatrix::zeros(x.rows(), x.cols());
    for (o, m) in out.data_mut().iter_mut().zip(mask.data_mut()) {
        if *o > 0.0 {
            *m = 1.0;
        } else {
            *o = 0.0;
        }
    }
    (out, mask)
}

pub fn relu_backward(grad: &DenseMatrix, mask: &DenseMatrix) -> Result<DenseMatrix> {
    grad.hadamard(mask)
}

/// Inverted dropout. In training mode each entry is zeroed with probability
/// `rate` and survivors are scaled by `1/(1-rate)`; in eval mode the input
/// passes through. The returned mask holds the per-entry scale factors used,
/// so the backward pass is a Hadamard product with it.
///
/// `rate == 0.0` and eval mode consume no randomness.
pub fn dropout(
    x: &DenseMatrix,
    rate: f64,
    training: bool,
    rng: &mut ChaCha8Rng,
) -> Result<(DenseMatrix, DenseMatrix)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Parameter(format!("dropout rate {rate} outside [0,1)")));
    }
    let rows = x.rows();
    let cols = x.cols();
    if !training || rate == 0.0 {
        let mask = DenseMatrix::from_vec(rows, cols, vec![1.0; rows * cols])?;
        return Ok((x.clone(), mask));
    }
    let scale = 1.0 / (1.0 - rate);
    let mut out = x.clone();
    let mut mask = DenseMatrix::zeros(rows, cols);
    for (o, m) in out.data_mut().iter_mut().zip(mask.data_mut()) {
        if rng.gen::<f64>() < rate {
            *o = 0.0;
        } else {
            *o *= scale;
            *m = scale;
        }
    }
    Ok((out, mask))
}

pub fn dropout_backward(grad: &DenseMatrix, mask: &DenseMatrix) -> Result<DenseMatrix> {
    grad.hadamard(mask)
}

/// Mean squared error over the labeled nodes only.
///
/// `predictions` is n-by-1, `targets` has length n, and `mask` lists the
/// labeled node indices. Returns the loss and its gradient with respect to
/// the predictions: `2(z_v - y_v)/|mask|` on labeled rows, 0 elsewhere.
pub fn masked_mse(
    predictions: &DenseMatrix,
    targets: &[f64],
    mask: &[usize],
) -> Result<(f64, DenseMatrix)> {
    if predictions.cols() != 1 {
        return Err(Error::Dimension(format!(
            "predictions must be n-by-1, got {}x{}",
            predictions.rows(),
            predictions.cols()
        )));
    }
    if predictions.rows() != targets.len() {
        return Err(Error::Dimension(format!(
            "{} predictions vs {} targets",
            predictions.rows(),
            targets.len()
        )));
    }
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let m = mask.len() as f64;
    let mut loss = 0.0;
    let mut grad = DenseMatrix::zeros(predictions.rows(), 1);
    for &v in mask {
        let diff = predictions.get(v, 0) - targets[v];
        loss += diff * diff;
        grad.set(v, 0, 2.0 * diff / m);
    }
    loss /= m;
    if !loss.is_finite() {
        return Err(Error::NonFinite(alloc::string::String::from("masked_mse loss")));
    }
    Ok((loss, grad))
}
