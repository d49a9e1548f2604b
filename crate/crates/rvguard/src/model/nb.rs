//! Multinomial naive Bayes over gram counts.

use serde::{Deserialize, Serialize};

use super::{argmax, check_vocab, output_width, Classifier, ModelError};
use crate::linalg::Matrix;
use crate::ngram::{FeatureVector, LabeledDataset};

/// A trained multinomial naive Bayes classifier.
///
/// `feature_log_likelihoods` holds `ln p(feature | class)` per class row;
/// each row exponentiates and sums to 1 within 1e-9.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub class_log_priors: Vec<f64>,
    /// class × feature.
    pub feature_log_likelihoods: Matrix,
    /// Laplace smoothing strength used at training time.
    pub alpha: f64,
    pub vocab_id: String,
}

/// Trains a multinomial NB model with Laplace smoothing `alpha`.
///
/// The dataset is interpreted as event counts (raw-norm vectors are the
/// natural fit; any non-negative weighting works). Every class id up to the
/// largest label must have at least one sample.
///
/// Pre: `alpha > 0`, dataset non-empty.
pub fn train_nb(data: &LabeledDataset, alpha: f64) -> Result<NbModel, ModelError> {
    assert!(alpha > 0.0, "smoothing must be positive");
    assert!(!data.is_empty(), "cannot train on an empty dataset");
    let (x, y) = data.to_matrix();
    let n_classes = output_width(&y, data.class_names.len());
    let d = x.n_cols();

    let mut class_counts = vec![0usize; n_classes];
    let mut feature_sums = Matrix::zeros(n_classes, d);
    for (row, &label) in y.iter().enumerate() {
        class_counts[label] += 1;
        for j in 0..d {
            let v = feature_sums.get(label, j) + x.get(row, j);
            feature_sums.set(label, j, v);
        }
    }
    if let Some(class) = class_counts.iter().position(|&n| n == 0) {
        return Err(ModelError::EmptyClass { class });
    }

    let n = y.len() as f64;
    let class_log_priors: Vec<f64> =
        class_counts.iter().map(|&c| (c as f64 / n).ln()).collect();
    let mut feature_log_likelihoods = Matrix::zeros(n_classes, d);
    for c in 0..n_classes {
        let total: f64 = (0..d).map(|j| feature_sums.get(c, j)).sum();
        let denom = total + alpha * d as f64;
        for j in 0..d {
            let p = (feature_sums.get(c, j) + alpha) / denom;
            feature_log_likelihoods.set(c, j, p.ln());
        }
    }
    Ok(NbModel {
        class_log_priors,
        feature_log_likelihoods,
        alpha,
        vocab_id: data.rows[0].vocab_id.clone(),
    })
}

impl NbModel {
    /// Log-posterior (unnormalized) per class for one vector.
    fn joint_log_probs(&self, values: &[f64]) -> Vec<f64> {
        self.class_log_priors
            .iter()
            .enumerate()
            .map(|(c, &prior)| {
                let ll: f64 = values
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| v * self.feature_log_likelihoods.get(c, j))
                    .sum();
                prior + ll
            })
            .collect()
    }

    /// Normalized class posteriors for one vector.
    pub fn posteriors(&self, x: &FeatureVector) -> Result<Vec<f64>, ModelError> {
        if x.values.len() != self.input_width() {
            return Err(ModelError::ShapeMismatch {
                expected: self.input_width(),
                found: x.values.len(),
            });
        }
        check_vocab(&self.vocab_id, x);
        let joint = self.joint_log_probs(&x.values);
        // log-sum-exp keeps tiny posteriors from flushing to zero
        let max = joint.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = joint.iter().map(|&l| (l - max).exp()).sum();
        Ok(joint.iter().map(|&l| (l - max).exp() / z).collect())
    }
}

impl Classifier for NbModel {
    fn predict(&self, x: &FeatureVector) -> Result<(usize, f64), ModelError> {
        let post = self.posteriors(x)?;
        let label = argmax(&post);
        Ok((label, post[label]))
    }

    fn input_width(&self) -> usize {
        self.feature_log_likelihoods.n_cols()
    }

    fn n_classes(&self) -> usize {
        self.class_log_priors.len()
    }

    fn vocab_id(&self) -> &str {
        &self.vocab_id
    }
}
