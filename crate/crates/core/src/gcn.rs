//! Three-layer graph convolutional regressor with a linear head.
//!
//! Each layer computes `H <- relu(S * dropout(H) * W)` where `S` is the
//! symmetrically normalized adjacency; the head maps the final hidden
//! representation to one real per node. Training is full-batch: forward,
//! masked MSE over the labeled nodes, reverse-mode gradients through the
//! fixed computation graph, one Adam step per epoch.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;

use crate::dataset::NodeTable;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numerics::{
    adam_step, dropout, masked_mse, relu, AdamParams, AdamState, CsrMatrix, DenseMatrix,
};
use crate::rng::{stream, Stream};

/// Propagation layer count and hidden width.
pub const LAYERS: usize = 3;
pub const HIDDEN: usize = 20;

/// Training hyperparameters. Defaults: dropout 0.6, learning rate 0.005,
/// weight decay 5e-4, 500 epochs, no early stopping.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct TrainParams {
    pub dropout: f64,
    pub lr: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    /// Stop after this many epochs without labeled-loss improvement.
    /// Off by default; the epoch budget alone bounds training.
    pub patience: Option<usize>,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams { dropout: 0.6, lr: 0.005, weight_decay: 5e-4, max_epochs: 500, patience: None }
    }
}

/// Weights of the GCN stack plus the linear head.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GcnModel {
    pub input_dim: usize,
    pub hidden: usize,
    /// `W^(l)`: input_dim x hidden, then hidden x hidden.
    pub gcn_weights: Vec<DenseMatrix>,
    /// Head weight, hidden x 1.
    pub mlp_weight: DenseMatrix,
    pub mlp_bias: f64,
    pub params: TrainParams,
    pub seed: u64,
}

/// Per-epoch labeled loss curve and run metadata. `wall_seconds` stays 0
/// here; callers with a clock fill it in.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainReport {
    pub losses: Vec<f64>,
    pub epochs: usize,
    pub seed: u64,
    pub wall_seconds: f64,
}

/// Gradients for every weight tensor, in model order.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub gcn: Vec<DenseMatrix>,
    pub mlp: DenseMatrix,
    pub bias: f64,
}

/// Glorot-initialized model: d -> 20 -> 20 -> 20 -> 1, zero bias.
/// Deterministic per `(d, seed)`.
pub fn init(input_dim: usize, seed: u64) -> Result<GcnModel> {
    if input_dim < 1 {
        return Err(Error::Parameter("input_dim must be >= 1".into()));
    }
    let mut rng = stream(seed, Stream::Init);
    let mut gcn_weights = Vec::with_capacity(LAYERS);
    let mut fan_in = input_dim;
    for _ in 0..LAYERS {
        gcn_weights.push(DenseMatrix::glorot_uniform(fan_in, HIDDEN, &mut rng));
        fan_in = HIDDEN;
    }
    let mlp_weight = DenseMatrix::glorot_uniform(HIDDEN, 1, &mut rng);
    Ok(GcnModel {
        input_dim,
        hidden: HIDDEN,
        gcn_weights,
        mlp_weight,
        mlp_bias: 0.0,
        params: TrainParams::default(),
        seed,
    })
}

impl GcnModel {
    pub fn with_params(mut self, params: TrainParams) -> Self {
        self.params = params;
        self
    }

    fn check_shapes<'g>(&self, graph: &'g Graph, x: &DenseMatrix) -> Result<&'g CsrMatrix> {
        if x.cols() != self.input_dim {
            return Err(Error::Dimension(format!(
                "features have {} columns, model expects {}",
                x.cols(),
                self.input_dim
            )));
        }
        let norm = graph.norm_adjacency().ok_or_else(|| {
            Error::Parameter("graph is not normalized; call graph::normalize first".into())
        })?;
        if norm.rows() != x.rows() {
            return Err(Error::Dimension(format!(
                "graph has {} nodes, features have {} rows",
                norm.rows(),
                x.rows()
            )));
        }
        Ok(norm)
    }
}

struct ForwardCache {
    /// Dropout scale masks per layer (empty in eval mode).
    dropout_masks: Vec<DenseMatrix>,
    /// `S * dropout(H_l)` per layer; the backward pass needs them for dW.
    propagated: Vec<DenseMatrix>,
    relu_masks: Vec<DenseMatrix>,
    /// Final hidden representation, n x hidden.
    last_hidden: DenseMatrix,
    predictions: DenseMatrix,
}

fn forward_cached(
    model: &GcnModel,
    norm: &CsrMatrix,
    x: &DenseMatrix,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Result<ForwardCache> {
    let mut h = x.clone();
    let mut dropout_masks = Vec::with_capacity(model.gcn_weights.len());
    let mut propagated = Vec::with_capacity(model.gcn_weights.len());
    let mut relu_masks = Vec::with_capacity(model.gcn_weights.len());
    for w in &model.gcn_weights {
        let (dropped, mask) = match rng.as_deref_mut() {
            Some(r) => dropout(&h, model.params.dropout, true, r)?,
            None => (h.clone(), DenseMatrix::zeros(0, 0)),
        };
        dropout_masks.push(mask);
        let p = norm.spmm(&dropped)?;
        let a = p.matmul(w)?;
        propagated.push(p);
        let (activated, mask) = relu(&a);
        relu_masks.push(mask);
        h = activated;
    }
    let mut z = h.matmul(&model.mlp_weight)?;
    for v in z.data_mut() {
        *v += model.mlp_bias;
    }
    z.ensure_finite("forward predictions")?;
    Ok(ForwardCache { dropout_masks, propagated, relu_masks, last_hidden: h, predictions: z })
}

/// Runs the model over every node, labeled and unlabeled alike. Pass a
/// dropout stream for training mode; `None` disables dropout (inference).
pub fn forward(
    model: &GcnModel,
    graph: &Graph,
    x: &DenseMatrix,
    rng: Option<&mut ChaCha8Rng>,
) -> Result<DenseMatrix> {
    let norm = model.check_shapes(graph, x)?;
    Ok(forward_cached(model, norm, x, rng)?.predictions)
}

/// Deterministic inference: forward with dropout off.
pub fn predict(model: &GcnModel, graph: &Graph, x: &DenseMatrix) -> Result<DenseMatrix> {
    forward(model, graph, x, None)
}

/// Final hidden representation of every node (the vector the head reads),
/// computed in inference mode. Useful for diagnostics.
pub fn hidden_representation(
    model: &GcnModel,
    graph: &Graph,
    x: &DenseMatrix,
) -> Result<DenseMatrix> {
    let norm = model.check_shapes(graph, x)?;
    Ok(forward_cached(model, norm, x, None)?.last_hidden)
}

/// Labeled-set MSE of the model in inference mode.
pub fn labeled_loss(
    model: &GcnModel,
    graph: &Graph,
    x: &DenseMatrix,
    targets: &[f64],
    mask: &[usize],
) -> Result<f64> {
    let z = predict(model, graph, x)?;
    Ok(masked_mse(&z, targets, mask)?.0)
}

/// One forward/backward pass. Returns the labeled loss and the gradient of
/// every weight tensor; dropout is active only when a stream is supplied.
pub fn loss_and_gradients(
    model: &GcnModel,
    graph: &Graph,
    x: &DenseMatrix,
    targets: &[f64],
    mask: &[usize],
    rng: Option<&mut ChaCha8Rng>,
) -> Result<(f64, Gradients)> {
    let norm = model.check_shapes(graph, x)?;
    let training = rng.is_some();
    let cache = forward_cached(model, norm, x, rng)?;
    let (loss, grad_z) = masked_mse(&cache.predictions, targets, mask)?;

    // Head: Z = H w + b.
    let grad_mlp = cache.last_hidden.matmul_at_b(&grad_z)?;
    let grad_bias: f64 = grad_z.data().iter().sum();
    let mut grad_h = grad_z.matmul_a_bt(&model.mlp_weight)?;

    let layers = model.gcn_weights.len();
    let mut grad_gcn = vec![DenseMatrix::zeros(0, 0); layers];
    for l in (0..layers).rev() {
        let grad_a = grad_h.hadamard(&cache.relu_masks[l])?;
        grad_gcn[l] = cache.propagated[l].matmul_at_b(&grad_a)?;
        if l > 0 {
            // dH_l = dropout_mask .* (S^T * (dA * W^T)); S is symmetric.
            let grad_p = grad_a.matmul_a_bt(&model.gcn_weights[l])?;
            let grad_dropped = norm.spmm(&grad_p)?;
            grad_h = if training {
                grad_dropped.hadamard(&cache.dropout_masks[l])?
            } else {
                grad_dropped
            };
        }
    }

    Ok((loss, Gradients { gcn: grad_gcn, mlp: grad_mlp, bias: grad_bias }))
}

/// Full-batch training for `max_epochs` epochs (or until patience runs out,
/// when configured). The model is updated in place.
///
/// Preconditions: the table has at least one labeled node and its features
/// are row-normalized; the graph is normalized over the same nodes.
pub fn train(model: &mut GcnModel, graph: &Graph, table: &NodeTable) -> Result<TrainReport> {
    let mask = table.labeled_indices();
    if mask.is_empty() {
        return Err(Error::NoLabels);
    }
    let x = table.features.clone();
    model.check_shapes(graph, &x)?;
    let targets: Vec<f64> = table.labels.iter().map(|l| l.unwrap_or(0.0)).collect();

    let hp = AdamParams {
        lr: model.params.lr,
        weight_decay: model.params.weight_decay,
        ..AdamParams::default()
    };
    let mut gcn_states: Vec<AdamState> =
        model.gcn_weights.iter().map(|w| AdamState::new(w.data().len())).collect();
    let mut mlp_state = AdamState::new(model.mlp_weight.data().len());
    let mut bias_state = AdamState::new(1);

    let mut rng = stream(model.seed, Stream::Dropout);
    let mut losses = Vec::with_capacity(model.params.max_epochs);
    let mut best = f64::INFINITY;
    let mut stale = 0usize;

    for epoch in 0..model.params.max_epochs {
        let (loss, grads) = loss_and_gradients(model, graph, &x, &targets, &mask, Some(&mut rng))?;
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        losses.push(loss);

        for (l, g) in grads.gcn.iter().enumerate() {
            adam_step(
                &layer_name(l),
                model.gcn_weights[l].data_mut(),
                g.data(),
                &mut gcn_states[l],
                &hp,
                true,
            )?;
        }
        adam_step("w_mlp", model.mlp_weight.data_mut(), grads.mlp.data(), &mut mlp_state, &hp, true)?;
        let mut bias = [model.mlp_bias];
        adam_step("b_mlp", &mut bias, &[grads.bias], &mut bias_state, &hp, false)?;
        model.mlp_bias = bias[0];

        if let Some(patience) = model.params.patience {
            if loss < best - 1e-12 {
                best = loss;
                stale = 0;
            } else {
                stale += 1;
                if stale >= patience {
                    break;
                }
            }
        }
    }

    Ok(TrainReport { epochs: losses.len(), losses, seed: model.seed, wall_seconds: 0.0 })
}

fn layer_name(l: usize) -> String {
    format!("w_gcn_{l}")
}
