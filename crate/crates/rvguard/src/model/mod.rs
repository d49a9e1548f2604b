//! Static classifiers over n-gram feature vectors: a multinomial naive
//! Bayes baseline and a small feed-forward network with layer freezing for
//! transfer learning.
//!
//! Both models train deterministically (the network from an explicit seed),
//! carry the vocabulary fingerprint of their feature schema, and break
//! posterior ties toward the lowest class index so prediction is a total
//! function.

pub mod mlp;
pub mod nb;

pub use mlp::{fine_tune, init_mlp, train_mlp, MlpModel};
pub use nb::{train_nb, NbModel};

use crate::ngram::FeatureVector;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ModelError {
    /// A class id in range had no training samples.
    #[error("class {class} has no training samples")]
    EmptyClass { class: usize },
    #[error("input width {found} does not match model width {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    /// Training diverged; the loss stopped being a number.
    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
}

/// Hyperparameters for network training and fine-tuning.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Samples per gradient step; the final batch of an epoch may be short.
    pub batch_size: usize,
    pub seed: u64,
    /// L2 weight penalty; 0 disables it. Biases are never penalized.
    pub l2_penalty: f64,
    /// Leading layers left untouched by `fine_tune`. Must stay below the
    /// layer count of the model being tuned.
    pub frozen_layer_count: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 200,
            batch_size: 16,
            seed: 0,
            l2_penalty: 0.0,
            frozen_layer_count: 0,
        }
    }
}

/// Anything that maps a feature vector to `(label, probability of label)`.
pub trait Classifier {
    fn predict(&self, x: &FeatureVector) -> Result<(usize, f64), ModelError>;
    /// Expected input width.
    fn input_width(&self) -> usize;
    /// Number of output classes.
    fn n_classes(&self) -> usize;
    /// Fingerprint of the vocabulary the model was trained against.
    fn vocab_id(&self) -> &str;
}

/// Index of the maximum value, lowest index on ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Warns (once per call site pattern) when a vector's schema fingerprint
/// differs from the model's; prediction still proceeds.
pub(crate) fn check_vocab(model_vocab: &str, x: &FeatureVector) {
    if model_vocab != x.vocab_id {
        log::warn!(
            "feature vector vocabulary {} does not match model vocabulary {}",
            x.vocab_id,
            model_vocab
        );
    }
}

/// Output width implied by a label set: at least binary, wide enough for
/// the largest label and the class-name table.
pub(crate) fn output_width(labels: &[usize], n_names: usize) -> usize {
    let max_label = labels.iter().copied().max().map_or(0, |m| m + 1);
    max_label.max(n_names).max(2)
}
