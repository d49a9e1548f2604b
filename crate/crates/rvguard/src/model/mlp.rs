//! Feed-forward network: relu hidden layers, softmax output, seeded SGD.
//!
//! Everything is deterministic given the seed: weight init draws in a fixed
//! order, epochs shuffle with the same generator, and updates are applied in
//! layer order. `fine_tune` reuses the same machinery with the leading
//! layers pinned, which is how a model trained on one instruction set is
//! adapted to related data.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, check_vocab, output_width, Classifier, ModelError, TrainConfig};
use crate::linalg::Matrix;
use crate::ngram::{FeatureVector, LabeledDataset};

/// A feed-forward classifier. Hidden layers apply relu; the output layer
/// applies softmax.
///
/// `weights[l]` maps layer `l` activations (width `layer_sizes[l]`) to layer
/// `l+1` pre-activations, one output unit per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
    pub vocab_id: String,
}

/// Builds a network with seeded uniform `±1/√fan_in` weights and zero
/// biases. Draw order is fixed (layer, then row-major within the layer), so
/// equal seeds give bit-identical models.
pub fn init_mlp(layer_sizes: &[usize], seed: u64, vocab_id: &str) -> MlpModel {
    assert!(layer_sizes.len() >= 2, "need at least input and output layers");
    assert!(layer_sizes.iter().all(|&s| s > 0), "zero-width layer");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for l in 0..layer_sizes.len() - 1 {
        let fan_in = layer_sizes[l];
        let fan_out = layer_sizes[l + 1];
        let bound = 1.0 / (fan_in as f64).sqrt();
        let mut w = Matrix::zeros(fan_out, fan_in);
        for v in w.data_mut() {
            *v = rng.random_range(-bound..bound);
        }
        weights.push(w);
        biases.push(vec![0.0; fan_out]);
    }
    MlpModel { layer_sizes: layer_sizes.to_vec(), weights, biases, vocab_id: vocab_id.into() }
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

impl MlpModel {
    /// Number of weight layers.
    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    /// Activations per layer, input first, softmax probabilities last.
    fn forward_trace(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![x.to_vec()];
        for l in 0..self.n_layers() {
            let mut z = self.weights[l].mul_vec(acts[l].as_slice());
            for (zi, bi) in z.iter_mut().zip(&self.biases[l]) {
                *zi += bi;
            }
            let a = if l + 1 == self.n_layers() {
                softmax(&z)
            } else {
                z.into_iter().map(|v| v.max(0.0)).collect()
            };
            acts.push(a);
        }
        acts
    }

    /// Output class probabilities for one input row.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.forward_trace(x).pop().unwrap()
    }

    /// Mean cross-entropy over a batch plus the L2 penalty term
    /// `l2/2 · Σ‖W‖²` (biases are not penalized).
    pub fn batch_loss(&self, xs: &Matrix, ys: &[usize], l2: f64) -> f64 {
        assert_eq!(xs.n_rows(), ys.len());
        let ce: f64 = xs
            .rows_iter()
            .zip(ys)
            .map(|(row, &y)| -self.forward(row)[y].ln())
            .sum::<f64>()
            / ys.len() as f64;
        ce + 0.5 * l2 * self.weight_sq_norm()
    }

    /// Gradient of [`MlpModel::batch_loss`] for every weight and bias.
    pub fn batch_gradients(
        &self,
        xs: &Matrix,
        ys: &[usize],
        l2: f64,
    ) -> (Vec<Matrix>, Vec<Vec<f64>>) {
        let (gw, gb, _) = self.batch_backprop(xs, ys, l2);
        (gw, gb)
    }

    fn weight_sq_norm(&self) -> f64 {
        self.weights.iter().map(|w| w.data().iter().map(|v| v * v).sum::<f64>()).sum()
    }

    /// Backpropagation over a batch: returns (weight grads, bias grads,
    /// mean cross-entropy). Gradients include the L2 term.
    fn batch_backprop(
        &self,
        xs: &Matrix,
        ys: &[usize],
        l2: f64,
    ) -> (Vec<Matrix>, Vec<Vec<f64>>, f64) {
        assert_eq!(xs.n_rows(), ys.len());
        let n = ys.len() as f64;
        let layers = self.n_layers();
        let mut gw: Vec<Matrix> =
            self.weights.iter().map(|w| Matrix::zeros(w.n_rows(), w.n_cols())).collect();
        let mut gb: Vec<Vec<f64>> = self.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        let mut ce_sum = 0.0;

        for (row, &y) in xs.rows_iter().zip(ys) {
            let acts = self.forward_trace(row);
            let probs = &acts[layers];
            ce_sum += -probs[y].ln();

            // softmax + cross-entropy collapses to (p - onehot)
            let mut delta: Vec<f64> = probs.clone();
            delta[y] -= 1.0;

            for l in (0..layers).rev() {
                let input = &acts[l];
                for (out, &d) in delta.iter().enumerate() {
                    gb[l][out] += d;
                    let grow = gw[l].row_mut(out);
                    for (j, &a) in input.iter().enumerate() {
                        grow[j] += d * a;
                    }
                }
                if l == 0 {
                    break;
                }
                // push delta through W, masked by relu slope of layer l's input
                let mut prev = vec![0.0; self.layer_sizes[l]];
                for (out, &d) in delta.iter().enumerate() {
                    let wrow = self.weights[l].row(out);
                    for (j, p) in prev.iter_mut().enumerate() {
                        *p += d * wrow[j];
                    }
                }
                for (p, &a) in prev.iter_mut().zip(input) {
                    if a <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }

        for l in 0..layers {
            for (g, &w) in gw[l].data_mut().iter_mut().zip(self.weights[l].data()) {
                *g = *g / n + l2 * w;
            }
            for g in &mut gb[l] {
                *g /= n;
            }
        }
        (gw, gb, ce_sum / n)
    }

    /// Mini-batch SGD on cross-entropy. Layers below `frozen` are never
    /// updated. Returns one loss per epoch (mean over the epoch's batches,
    /// measured before each update).
    fn fit(
        &mut self,
        data: &LabeledDataset,
        cfg: &TrainConfig,
        frozen: usize,
    ) -> Result<Vec<f64>, ModelError> {
        assert!(cfg.learning_rate > 0.0, "learning rate must be positive");
        assert!(cfg.batch_size > 0, "batch size must be positive");
        assert!(!data.is_empty(), "cannot train on an empty dataset");
        let (xs, ys) = data.to_matrix();
        let d = self.layer_sizes[0];
        if xs.n_cols() != d {
            return Err(ModelError::ShapeMismatch { expected: d, found: xs.n_cols() });
        }
        let out = *self.layer_sizes.last().unwrap();
        let max_label = ys.iter().copied().max().unwrap();
        if max_label >= out {
            return Err(ModelError::ShapeMismatch { expected: out, found: max_label + 1 });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let n = ys.len();
        let mut history = Vec::with_capacity(cfg.epochs);
        let mut order: Vec<usize> = (0..n).collect();
        for epoch in 0..cfg.epochs {
            order.shuffle(&mut rng);
            let mut loss_sum = 0.0;
            for chunk in order.chunks(cfg.batch_size) {
                let rows: Vec<Vec<f64>> = chunk.iter().map(|&i| xs.row(i).to_vec()).collect();
                let batch_x = Matrix::from_rows(&rows);
                let batch_y: Vec<usize> = chunk.iter().map(|&i| ys[i]).collect();
                let (gw, gb, ce) = self.batch_backprop(&batch_x, &batch_y, cfg.l2_penalty);
                let l2_term = 0.5 * cfg.l2_penalty * self.weight_sq_norm();
                loss_sum += (ce + l2_term) * chunk.len() as f64;
                for l in frozen..self.n_layers() {
                    for (w, &g) in self.weights[l].data_mut().iter_mut().zip(gw[l].data()) {
                        *w -= cfg.learning_rate * g;
                    }
                    for (b, &g) in self.biases[l].iter_mut().zip(&gb[l]) {
                        *b -= cfg.learning_rate * g;
                    }
                }
            }
            let loss = loss_sum / n as f64;
            if !loss.is_finite() {
                return Err(ModelError::NonFiniteLoss { epoch });
            }
            history.push(loss);
        }
        Ok(history)
    }
}

/// Trains a fresh network on `data`.
///
/// The architecture is `[input width, hidden_sizes..., class count]`; the
/// class count covers the largest label and the dataset's class table (at
/// least 2). Initialization and the epoch shuffle both derive from
/// `cfg.seed`, so identical inputs give bit-identical models.
/// `cfg.frozen_layer_count` is ignored here; freezing is a fine-tuning
/// concept.
pub fn train_mlp(
    data: &LabeledDataset,
    hidden_sizes: &[usize],
    cfg: &TrainConfig,
) -> Result<(MlpModel, Vec<f64>), ModelError> {
    assert!(!data.is_empty(), "cannot train on an empty dataset");
    let d = data.rows[0].values.len();
    let classes = output_width(&data.labels, data.class_names.len());
    let mut sizes = vec![d];
    sizes.extend_from_slice(hidden_sizes);
    sizes.push(classes);
    let mut model = init_mlp(&sizes, cfg.seed, &data.rows[0].vocab_id);
    let history = model.fit(data, cfg, 0)?;
    Ok((model, history))
}

/// Continues training `base` on new data with the first
/// `cfg.frozen_layer_count` layers pinned.
///
/// Frozen parameters come back bit-identical; the remaining layers train
/// exactly as in [`train_mlp`]. With zero frozen layers this is ordinary
/// training initialized at `base`.
///
/// Pre: `cfg.frozen_layer_count < base.n_layers()`.
pub fn fine_tune(
    base: &MlpModel,
    data: &LabeledDataset,
    cfg: &TrainConfig,
) -> Result<(MlpModel, Vec<f64>), ModelError> {
    assert!(
        cfg.frozen_layer_count < base.n_layers(),
        "freezing every layer leaves nothing to tune"
    );
    let mut model = base.clone();
    model.vocab_id = data.rows.first().map_or(model.vocab_id, |r| r.vocab_id.clone());
    let history = model.fit(data, cfg, cfg.frozen_layer_count)?;
    Ok((model, history))
}

impl Classifier for MlpModel {
    fn predict(&self, x: &FeatureVector) -> Result<(usize, f64), ModelError> {
        if x.values.len() != self.input_width() {
            return Err(ModelError::ShapeMismatch {
                expected: self.input_width(),
                found: x.values.len(),
            });
        }
        check_vocab(&self.vocab_id, x);
        let probs = self.forward(&x.values);
        let label = argmax(&probs);
        Ok((label, probs[label]))
    }

    fn input_width(&self) -> usize {
        self.layer_sizes[0]
    }

    fn n_classes(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    fn vocab_id(&self) -> &str {
        &self.vocab_id
    }
}
