//! Anomaly detectors and ensembles over windowed counter features.
//!
//! Two one-class detectors learn what normal execution looks like from
//! normal-only training windows and flag anything that scores past a
//! training-quantile threshold: a diagonal-covariance Gaussian model scored
//! by squared Mahalanobis distance, and a k-nearest-neighbor model scored by
//! mean distance to the k closest reference windows.
//!
//! For supervised separation of anomaly kinds there are AdaBoost over
//! decision stumps and bootstrap bagging, and a two-stage arrangement that
//! only consults the (more expensive) multi-class stage for windows the
//! one-class stage already flagged.

use serde::{Deserialize, Serialize};
use std::io::{self, Write};

use crate::linalg::Matrix;
use crate::util::{fmt_f64, mean_var, percentile};

/// Variances below this are clamped so degenerate features cannot produce
/// infinite scores.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Weighted error substituted when a boosting round is perfect, capping the
/// stump weight at a large finite value.
const EPSILON_MIN: f64 = 1e-10;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DetectError {
    #[error("need at least {needed} training samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("input width {found} does not match model width {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    /// Supervised ensembles need both classes in the training data.
    #[error("training data contains fewer than two classes")]
    SingleClass,
    /// Boosting ended with zero usable stumps; prediction is undefined.
    #[error("ensemble contains no members")]
    EmptyEnsemble,
}

/// One-class detector interface: a score that grows with abnormality and a
/// fixed threshold learned from training data.
pub trait AnomalyScorer {
    /// Abnormality score of one feature row.
    fn score(&self, x: &[f64]) -> Result<f64, DetectError>;
    /// Score cutoff; anything strictly above it is anomalous.
    fn threshold(&self) -> f64;
    /// Expected feature width.
    fn input_width(&self) -> usize;

    /// Scores and thresholds in one step.
    fn detect(&self, x: &[f64]) -> Result<(f64, bool), DetectError> {
        let score = self.score(x)?;
        Ok((score, score > self.threshold()))
    }
}

/// Diagonal Gaussian one-class model scored by squared Mahalanobis
/// distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianOneClass {
    pub mean: Vec<f64>,
    /// Per-feature population variances, floored at [`VARIANCE_FLOOR`].
    pub variances: Vec<f64>,
    pub threshold: f64,
    /// Training-score quantile the threshold was taken at.
    pub threshold_percentile: f64,
}

/// Fits the Gaussian one-class detector on normal-only rows.
///
/// The threshold is the given percentile (linear interpolation) of the
/// training rows' own scores, so at 100 no training row is flagged.
///
/// Pre: `threshold_percentile` ∈ (0, 100].
pub fn fit_oneclass_gaussian(
    x_normal: &Matrix,
    threshold_percentile: f64,
) -> Result<GaussianOneClass, DetectError> {
    assert!(
        threshold_percentile > 0.0 && threshold_percentile <= 100.0,
        "percentile must lie in (0, 100]"
    );
    let n = x_normal.n_rows();
    if n < 2 {
        return Err(DetectError::TooFewSamples { needed: 2, got: n });
    }
    let d = x_normal.n_cols();
    let mut mean = Vec::with_capacity(d);
    let mut variances = Vec::with_capacity(d);
    for j in 0..d {
        let (m, v) = mean_var(&x_normal.column(j));
        mean.push(m);
        variances.push(v.max(VARIANCE_FLOOR));
    }
    let mut model =
        GaussianOneClass { mean, variances, threshold: 0.0, threshold_percentile };
    let scores: Vec<f64> =
        x_normal.rows_iter().map(|row| model.score(row).unwrap()).collect();
    model.threshold = percentile(&scores, threshold_percentile);
    Ok(model)
}

impl AnomalyScorer for GaussianOneClass {
    fn score(&self, x: &[f64]) -> Result<f64, DetectError> {
        if x.len() != self.mean.len() {
            return Err(DetectError::ShapeMismatch {
                expected: self.mean.len(),
                found: x.len(),
            });
        }
        Ok(x.iter()
            .zip(&self.mean)
            .zip(&self.variances)
            .map(|((&xi, &mi), &vi)| (xi - mi).powi(2) / vi)
            .sum())
    }

    fn threshold(&self) -> f64 {
        self.threshold
    }

    fn input_width(&self) -> usize {
        self.mean.len()
    }
}

/// k-nearest-neighbor one-class model scored by mean distance to the k
/// closest reference rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnOneClass {
    pub references: Matrix,
    pub k: usize,
    pub threshold: f64,
    pub threshold_percentile: f64,
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Mean of the k smallest values in `dists`.
fn mean_k_smallest(mut dists: Vec<f64>, k: usize) -> f64 {
    dists.sort_by(f64::total_cmp);
    dists[..k].iter().sum::<f64>() / k as f64
}

/// Fits the kNN one-class detector on normal-only rows.
///
/// The threshold is a percentile of leave-one-out training scores (each
/// row's mean distance to its k nearest other rows), so it is meaningful
/// even though every training row is its own nearest neighbor at inference
/// time.
///
/// Pre: `k >= 1`, `threshold_percentile` ∈ (0, 100].
pub fn fit_knn_oneclass(
    x_normal: &Matrix,
    k: usize,
    threshold_percentile: f64,
) -> Result<KnnOneClass, DetectError> {
    assert!(k >= 1, "k must be at least 1");
    assert!(
        threshold_percentile > 0.0 && threshold_percentile <= 100.0,
        "percentile must lie in (0, 100]"
    );
    let n = x_normal.n_rows();
    if n <= k {
        return Err(DetectError::TooFewSamples { needed: k + 1, got: n });
    }
    let loo_scores: Vec<f64> = (0..n)
        .map(|i| {
            let dists: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| euclidean(x_normal.row(i), x_normal.row(j)))
                .collect();
            mean_k_smallest(dists, k)
        })
        .collect();
    Ok(KnnOneClass {
        references: x_normal.clone(),
        k,
        threshold: percentile(&loo_scores, threshold_percentile),
        threshold_percentile,
    })
}

impl AnomalyScorer for KnnOneClass {
    fn score(&self, x: &[f64]) -> Result<f64, DetectError> {
        if x.len() != self.references.n_cols() {
            return Err(DetectError::ShapeMismatch {
                expected: self.references.n_cols(),
                found: x.len(),
            });
        }
        let dists: Vec<f64> =
            self.references.rows_iter().map(|r| euclidean(r, x)).collect();
        Ok(mean_k_smallest(dists, self.k))
    }

    fn threshold(&self) -> f64 {
        self.threshold
    }

    fn input_width(&self) -> usize {
        self.references.n_cols()
    }
}

/// Either one-class detector, for storage and uniform dispatch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OneClass {
    Gaussian(GaussianOneClass),
    Knn(KnnOneClass),
}

impl AnomalyScorer for OneClass {
    fn score(&self, x: &[f64]) -> Result<f64, DetectError> {
        match self {
            OneClass::Gaussian(m) => m.score(x),
            OneClass::Knn(m) => m.score(x),
        }
    }

    fn threshold(&self) -> f64 {
        match self {
            OneClass::Gaussian(m) => m.threshold,
            OneClass::Knn(m) => m.threshold,
        }
    }

    fn input_width(&self) -> usize {
        match self {
            OneClass::Gaussian(m) => m.input_width(),
            OneClass::Knn(m) => m.input_width(),
        }
    }
}

/// Axis-aligned threshold test: predicts −1 on one side, +1 on the other.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    /// +1 predicts the high side as +1; −1 flips both sides.
    pub polarity: i8,
}

impl Stump {
    /// Signed prediction in {−1, +1}.
    pub fn predict(&self, x: &[f64]) -> i8 {
        if x[self.feature] <= self.threshold {
            -self.polarity
        } else {
            self.polarity
        }
    }
}

/// Exhaustive best stump under weights `dist`: every midpoint of
/// consecutive sorted unique values per feature, both polarities, minimum
/// weighted error with first-found tie-break (feature, then threshold, then
/// polarity +1). Returns None when every feature is constant.
fn best_stump(x: &Matrix, y_pm: &[i8], dist: &[f64]) -> Option<(Stump, f64)> {
    let total: f64 = dist.iter().sum();
    let mut best: Option<(Stump, f64)> = None;
    for feature in 0..x.n_cols() {
        let mut values = x.column(feature);
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let threshold = (pair[0] + pair[1]) / 2.0;
            // error of polarity +1; polarity −1 is its complement
            let err_pos: f64 = (0..x.n_rows())
                .filter(|&i| {
                    let pred = if x.get(i, feature) <= threshold { -1 } else { 1 };
                    pred != y_pm[i]
                })
                .map(|i| dist[i])
                .sum();
            for (polarity, err) in [(1i8, err_pos), (-1i8, total - err_pos)] {
                if best.as_ref().is_none_or(|(_, e)| err < *e) {
                    best = Some((Stump { feature, threshold, polarity }, err));
                }
            }
        }
    }
    best
}

/// Weighted ensemble of stumps with the label pair it separates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub stumps: Vec<Stump>,
    pub alphas: Vec<f64>,
    /// `classes[0]` plays −1, `classes[1]` plays +1; ascending.
    pub classes: [usize; 2],
    pub n_features: usize,
}

/// Per-round training diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostRound {
    /// Weighted error of the round's stump.
    pub epsilon: f64,
    /// Sum of the sample distribution after the round's reweighting.
    pub dist_sum: f64,
}

/// Maps raw labels onto {−1, +1}. Errors unless exactly two distinct labels
/// are present (more than two is a precondition violation).
fn two_class_mapping(y: &[usize]) -> Result<[usize; 2], DetectError> {
    let mut classes: Vec<usize> = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(DetectError::SingleClass);
    }
    assert!(classes.len() == 2, "stump ensembles are two-class learners");
    Ok([classes[0], classes[1]])
}

/// Boosts decision stumps for `t_rounds` rounds.
///
/// Classic scheme: uniform initial distribution, stump weight
/// `α = ½ ln((1−ε)/ε)`, multiplicative reweighting `D·exp(−α y h)` with
/// renormalization. A perfect round keeps its stump with ε clamped to 1e-10
/// and stops; a round no better than chance (ε ≥ 0.5, or no usable stump)
/// is discarded and stops. `t_rounds` of 0 trains an empty ensemble that
/// errors at prediction time.
///
/// Returns the model plus per-round diagnostics (weighted error and
/// post-update distribution sum).
pub fn adaboost_train(
    x: &Matrix,
    y: &[usize],
    t_rounds: usize,
) -> Result<(AdaBoostModel, Vec<BoostRound>), DetectError> {
    assert_eq!(x.n_rows(), y.len(), "one label per row");
    let classes = two_class_mapping(y)?;
    let y_pm: Vec<i8> = y.iter().map(|&l| if l == classes[0] { -1 } else { 1 }).collect();
    let n = y.len();

    let mut dist = vec![1.0 / n as f64; n];
    let mut model =
        AdaBoostModel { stumps: Vec::new(), alphas: Vec::new(), classes, n_features: x.n_cols() };
    let mut rounds = Vec::new();
    for _ in 0..t_rounds {
        let Some((stump, epsilon)) = best_stump(x, &y_pm, &dist) else {
            break;
        };
        if epsilon >= 0.5 {
            break;
        }
        let eps_eff = epsilon.max(EPSILON_MIN);
        let alpha = 0.5 * ((1.0 - eps_eff) / eps_eff).ln();
        model.stumps.push(stump);
        model.alphas.push(alpha);

        for (i, w) in dist.iter_mut().enumerate() {
            let margin = f64::from(y_pm[i]) * f64::from(stump.predict(x.row(i)));
            *w *= (-alpha * margin).exp();
        }
        let sum: f64 = dist.iter().sum();
        for w in &mut dist {
            *w /= sum;
        }
        rounds.push(BoostRound { epsilon, dist_sum: dist.iter().sum() });
        if epsilon == 0.0 {
            break;
        }
    }
    Ok((model, rounds))
}

impl AdaBoostModel {
    /// Weighted vote margin; positive means `classes[1]`.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64, DetectError> {
        if self.stumps.is_empty() {
            return Err(DetectError::EmptyEnsemble);
        }
        if x.len() != self.n_features {
            return Err(DetectError::ShapeMismatch {
                expected: self.n_features,
                found: x.len(),
            });
        }
        Ok(self
            .stumps
            .iter()
            .zip(&self.alphas)
            .map(|(s, &a)| a * f64::from(s.predict(x)))
            .sum())
    }

    /// The ensemble truncated to its first `t` stumps (for learning-curve
    /// analysis).
    pub fn truncated(&self, t: usize) -> AdaBoostModel {
        AdaBoostModel {
            stumps: self.stumps[..t].to_vec(),
            alphas: self.alphas[..t].to_vec(),
            classes: self.classes,
            n_features: self.n_features,
        }
    }
}

/// Multi-member vote interface shared by the ensembles.
pub trait LabelPredictor {
    fn predict_label(&self, x: &[f64]) -> Result<usize, DetectError>;
}

impl LabelPredictor for AdaBoostModel {
    fn predict_label(&self, x: &[f64]) -> Result<usize, DetectError> {
        let value = self.decision_value(x)?;
        // zero margin ties toward the lower label
        Ok(if value > 0.0 { self.classes[1] } else { self.classes[0] })
    }
}

/// Base learner grown on each bootstrap bag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseLearner {
    Stump,
}

impl std::str::FromStr for BaseLearner {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "stump" => Ok(BaseLearner::Stump),
            other => Err(format!("unknown base learner {other:?}")),
        }
    }
}

/// Bootstrap-aggregated stump ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggingModel {
    pub members: Vec<Stump>,
    /// `classes[0]` plays −1, `classes[1]` plays +1; ascending.
    pub classes: [usize; 2],
    pub seed: u64,
    pub n_features: usize,
}

/// Trains one member per explicit bag of row indices.
///
/// This is the deterministic core of [`bagging_train`] and doubles as a test
/// hook: passing a single identity bag makes the ensemble equal its one base
/// learner. A bag whose features are all constant yields a member that
/// always votes the bag's majority label.
pub fn bagging_train_with_bags(
    x: &Matrix,
    y: &[usize],
    bags: &[Vec<usize>],
    _base: BaseLearner,
    seed: u64,
) -> Result<BaggingModel, DetectError> {
    assert!(!bags.is_empty(), "at least one bag required");
    let classes = two_class_mapping(y)?;
    let mut members = Vec::with_capacity(bags.len());
    for bag in bags {
        assert!(!bag.is_empty(), "empty bag");
        let rows: Vec<Vec<f64>> = bag.iter().map(|&i| x.row(i).to_vec()).collect();
        let bag_x = Matrix::from_rows(&rows);
        let y_pm: Vec<i8> =
            bag.iter().map(|&i| if y[i] == classes[0] { -1 } else { 1 }).collect();
        let dist = vec![1.0 / bag.len() as f64; bag.len()];
        let member = match best_stump(&bag_x, &y_pm, &dist) {
            Some((stump, _)) => stump,
            None => {
                // constant bag: always predict its majority (+1 wins ties
                // toward the lower label via the vote counter below)
                let pos: usize = y_pm.iter().filter(|&&v| v == 1).count();
                let majority = if 2 * pos > bag.len() { 1 } else { -1 };
                Stump { feature: 0, threshold: f64::MAX, polarity: -majority }
            }
        };
        members.push(member);
    }
    Ok(BaggingModel { members, classes, seed, n_features: x.n_cols() })
}

/// Trains `b` stumps on seeded bootstrap resamples (with replacement, bag
/// size = dataset size) and aggregates them by majority vote.
///
/// Pre: `b >= 1`.
pub fn bagging_train(
    x: &Matrix,
    y: &[usize],
    b: usize,
    base: BaseLearner,
    seed: u64,
) -> Result<BaggingModel, DetectError> {
    use rand::Rng;
    use rand::SeedableRng;
    assert!(b >= 1, "at least one bag required");
    let n = x.n_rows();
    assert!(n >= 1, "cannot train on an empty dataset");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let bags: Vec<Vec<usize>> =
        (0..b).map(|_| (0..n).map(|_| rng.random_range(0..n)).collect()).collect();
    bagging_train_with_bags(x, y, &bags, base, seed)
}

impl LabelPredictor for BaggingModel {
    fn predict_label(&self, x: &[f64]) -> Result<usize, DetectError> {
        if self.members.is_empty() {
            return Err(DetectError::EmptyEnsemble);
        }
        if x.len() != self.n_features {
            return Err(DetectError::ShapeMismatch {
                expected: self.n_features,
                found: x.len(),
            });
        }
        let pos: usize = self.members.iter().filter(|s| s.predict(x) == 1).count();
        let neg = self.members.len() - pos;
        // ties fall to classes[0], the lower label
        Ok(if pos > neg { self.classes[1] } else { self.classes[0] })
    }
}

/// Either supervised ensemble, for storage and uniform dispatch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Ensemble {
    AdaBoost(AdaBoostModel),
    Bagging(BaggingModel),
}

impl LabelPredictor for Ensemble {
    fn predict_label(&self, x: &[f64]) -> Result<usize, DetectError> {
        match self {
            Ensemble::AdaBoost(m) => m.predict_label(x),
            Ensemble::Bagging(m) => m.predict_label(x),
        }
    }
}

/// Outcome of a two-stage detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Normal,
    /// Anomalous, classified into an anomaly class by stage 2.
    Anomaly { class: usize },
}

impl Verdict {
    /// Text form for reports: `normal` or the anomaly class name.
    pub fn render(&self, class_names: &[String]) -> String {
        match *self {
            Verdict::Normal => "normal".to_owned(),
            Verdict::Anomaly { class } => class_names
                .get(class)
                .cloned()
                .unwrap_or_else(|| class.to_string()),
        }
    }
}

/// Runs the gate-then-classify arrangement on one row.
///
/// Stage 2 is consulted only when stage 1 flags the row, never for normal
/// verdicts. The returned score is always stage 1's.
pub fn two_stage_detect<S1, S2>(
    stage1: &S1,
    stage2: &S2,
    x: &[f64],
) -> Result<(f64, Verdict), DetectError>
where
    S1: AnomalyScorer + ?Sized,
    S2: LabelPredictor + ?Sized,
{
    let (score, anomalous) = stage1.detect(x)?;
    if !anomalous {
        return Ok((score, Verdict::Normal));
    }
    let class = stage2.predict_label(x)?;
    Ok((score, Verdict::Anomaly { class }))
}

/// A persisted two-stage detector: one-class gate plus anomaly-class
/// ensemble over the same feature schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStageModel {
    pub stage1: OneClass,
    pub stage2: Ensemble,
    /// Names for stage-2 classes in rendered verdicts.
    pub class_names: Vec<String>,
}

impl TwoStageModel {
    /// Pre: both stages expect the same feature width.
    pub fn new(stage1: OneClass, stage2: Ensemble, class_names: Vec<String>) -> TwoStageModel {
        let w1 = stage1.input_width();
        let w2 = match &stage2 {
            Ensemble::AdaBoost(m) => m.n_features,
            Ensemble::Bagging(m) => m.n_features,
        };
        assert_eq!(w1, w2, "stage feature schemas must match");
        TwoStageModel { stage1, stage2, class_names }
    }

    pub fn detect(&self, x: &[f64]) -> Result<(f64, Verdict), DetectError> {
        two_stage_detect(&self.stage1, &self.stage2, x)
    }
}

/// One row of a detection report.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRow {
    pub window_start_row: usize,
    pub score: f64,
    pub verdict: String,
}

/// Writes `window_start_row,score,verdict` CSV with 17-digit scores.
pub fn write_detection_csv<W: Write>(rows: &[DetectionRow], mut w: W) -> io::Result<()> {
    writeln!(w, "window_start_row,score,verdict")?;
    for r in rows {
        writeln!(w, "{},{},{}", r.window_start_row, fmt_f64(r.score), r.verdict)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::cell::Cell;

    fn col(values: &[f64]) -> Matrix {
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        Matrix::from_rows(&rows)
    }

    #[test]
    fn gaussian_hand_case() {
        let model = fit_oneclass_gaussian(&col(&[0.0, 1.0, 2.0, 3.0, 4.0]), 95.0).unwrap();
        assert_eq!(model.mean, [2.0]);
        assert_eq!(model.variances, [2.0]);
        // training scores {2, .5, 0, .5, 2} → 95th percentile 2
        assert_eq!(model.threshold, 2.0);
        let (score, anomalous) = model.detect(&[10.0]).unwrap();
        assert_eq!(score, 32.0);
        assert!(anomalous);
        let (score, anomalous) = model.detect(&[2.0]).unwrap();
        assert_eq!(score, 0.0);
        assert!(!anomalous);
    }

    #[test]
    fn gaussian_degenerate_cloud_flags_any_distinct_point() {
        let model = fit_oneclass_gaussian(&col(&[7.0, 7.0, 7.0]), 95.0).unwrap();
        assert_eq!(model.variances, [VARIANCE_FLOOR]);
        assert!(!model.detect(&[7.0]).unwrap().1);
        assert!(model.detect(&[7.0 + 1e-3]).unwrap().1);
    }

    #[test]
    fn percentile_100_flags_no_training_point() {
        let x = col(&[1.0, 4.0, 2.0, 9.0, 5.0]);
        let gauss = fit_oneclass_gaussian(&x, 100.0).unwrap();
        let knn = fit_knn_oneclass(&x, 2, 100.0).unwrap();
        for row in x.rows_iter() {
            assert!(!gauss.detect(row).unwrap().1);
            assert!(!knn.detect(row).unwrap().1);
        }
    }

    #[test]
    fn gaussian_score_grows_along_each_axis() {
        let x = Matrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 3.0], vec![4.0, 2.0]]);
        let model = fit_oneclass_gaussian(&x, 95.0).unwrap();
        for axis in 0..2 {
            let mut prev = -1.0;
            for step in 0..5 {
                let mut p = model.mean.clone();
                p[axis] += step as f64;
                let s = model.score(&p).unwrap();
                assert!(s > prev);
                prev = s;
            }
        }
    }

    #[test]
    fn gaussian_threshold_reproducible_from_percentile() {
        let x = Matrix::from_rows(&[
            vec![1.0, 0.0],
            vec![2.0, 4.0],
            vec![0.0, 2.0],
            vec![3.0, 1.0],
        ]);
        let model = fit_oneclass_gaussian(&x, 75.0).unwrap();
        let scores: Vec<f64> = x.rows_iter().map(|r| model.score(r).unwrap()).collect();
        assert_eq!(model.threshold, percentile(&scores, model.threshold_percentile));
    }

    #[test]
    fn too_few_samples_is_reported() {
        assert_eq!(
            fit_oneclass_gaussian(&col(&[1.0]), 95.0).unwrap_err(),
            DetectError::TooFewSamples { needed: 2, got: 1 }
        );
        assert_eq!(
            fit_knn_oneclass(&col(&[1.0, 2.0]), 2, 95.0).unwrap_err(),
            DetectError::TooFewSamples { needed: 3, got: 2 }
        );
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let model = fit_oneclass_gaussian(&col(&[1.0, 2.0, 3.0]), 95.0).unwrap();
        assert_eq!(
            model.score(&[1.0, 2.0]).unwrap_err(),
            DetectError::ShapeMismatch { expected: 1, found: 2 }
        );
    }

    #[test]
    fn knn_hand_case() {
        let model = fit_knn_oneclass(&col(&[0.0, 1.0, 2.0, 3.0, 4.0]), 2, 95.0).unwrap();
        // nearest two to 10 are {4, 3}: distances 6 and 7
        assert_eq!(model.score(&[10.0]).unwrap(), 6.5);
        assert!(model.detect(&[10.0]).unwrap().1);
    }

    #[test]
    fn knn_zero_distance_on_reference_point() {
        let model = fit_knn_oneclass(&col(&[0.0, 5.0, 9.0]), 1, 95.0).unwrap();
        let (score, anomalous) = model.detect(&[5.0]).unwrap();
        assert_eq!(score, 0.0);
        assert!(!anomalous);
    }

    #[test]
    fn knn_degenerate_cloud() {
        let model = fit_knn_oneclass(&col(&[3.0, 3.0, 3.0]), 1, 95.0).unwrap();
        assert_eq!(model.threshold, 0.0);
        assert!(!model.detect(&[3.0]).unwrap().1);
        assert!(model.detect(&[3.5]).unwrap().1);
    }

    #[test]
    fn adaboost_separable_in_one_round() {
        let x = col(&[0.0, 1.0, 2.0, 3.0]);
        let y = [0, 0, 1, 1];
        let (model, rounds) = adaboost_train(&x, &y, 10).unwrap();
        assert_eq!(model.stumps.len(), 1);
        assert_eq!(rounds.len(), 1);
        assert_eq!(rounds[0].epsilon, 0.0);
        let cap = 0.5 * ((1.0 - EPSILON_MIN) / EPSILON_MIN).ln();
        assert_eq!(model.alphas[0], cap);
        for (i, row) in x.rows_iter().enumerate() {
            assert_eq!(model.predict_label(row).unwrap(), y[i]);
        }
    }

    #[test]
    fn adaboost_label_inversion_flips_polarity() {
        let x = col(&[0.0, 1.0, 2.0, 3.0]);
        let (a, _) = adaboost_train(&x, &[0, 0, 1, 1], 5).unwrap();
        let (b, _) = adaboost_train(&x, &[1, 1, 0, 0], 5).unwrap();
        assert_eq!(a.stumps[0].feature, b.stumps[0].feature);
        assert_eq!(a.stumps[0].threshold, b.stumps[0].threshold);
        assert_eq!(a.stumps[0].polarity, -b.stumps[0].polarity);
        for row in x.rows_iter() {
            // inverted labels, inverted predictions
            assert_ne!(a.predict_label(row).unwrap(), b.predict_label(row).unwrap());
        }
    }

    #[test]
    fn empty_ensemble_errors_at_predict_time() {
        let x = col(&[0.0, 1.0, 2.0, 3.0]);
        let (model, rounds) = adaboost_train(&x, &[0, 0, 1, 1], 0).unwrap();
        assert!(rounds.is_empty());
        assert_eq!(model.predict_label(&[1.0]).unwrap_err(), DetectError::EmptyEnsemble);
    }

    #[test]
    fn hopeless_round_is_discarded() {
        // every stump on this data has weighted error exactly 0.5
        let x = col(&[1.0, 1.0, 2.0, 2.0]);
        let y = [0, 1, 0, 1];
        let (model, rounds) = adaboost_train(&x, &y, 5).unwrap();
        assert!(model.stumps.is_empty());
        assert!(rounds.is_empty());
    }

    #[test]
    fn single_class_is_rejected() {
        let x = col(&[1.0, 2.0]);
        assert_eq!(adaboost_train(&x, &[3, 3], 5).unwrap_err(), DetectError::SingleClass);
    }

    /// Seeded noisy 2-D two-class data: class means (0,0) and (2,2), 10%
    /// label flips.
    fn noisy_data(seed: u64, n: usize) -> (Matrix, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let class = i % 2;
            let center = class as f64 * 2.0;
            rows.push(vec![
                center + rng.random_range(-1.0..1.0),
                center + rng.random_range(-1.0..1.0),
            ]);
            let flip = rng.random_range(0.0..1.0) < 0.1;
            labels.push(if flip { 1 - class } else { class });
        }
        (Matrix::from_rows(&rows), labels)
    }

    #[test]
    fn boosting_respects_the_training_error_bound() {
        for seed in 0..5 {
            let (x, y) = noisy_data(seed, 40);
            let (model, rounds) = adaboost_train(&x, &y, 12).unwrap();
            let mut bound = 1.0;
            for (t, round) in rounds.iter().enumerate() {
                assert!((round.dist_sum - 1.0).abs() <= 1e-12, "seed {seed} round {t}");
                bound *= 2.0 * (round.epsilon * (1.0 - round.epsilon)).sqrt();
                let partial = model.truncated(t + 1);
                let errors = x
                    .rows_iter()
                    .zip(&y)
                    .filter(|(row, &label)| partial.predict_label(row).unwrap() != label)
                    .count();
                let training_error = errors as f64 / y.len() as f64;
                assert!(
                    training_error <= bound + 1e-12,
                    "seed {seed} round {t}: {training_error} > {bound}"
                );
            }
        }
    }

    #[test]
    fn identity_bag_equals_its_single_learner() {
        let (x, y) = noisy_data(3, 30);
        let identity: Vec<usize> = (0..x.n_rows()).collect();
        let bagged =
            bagging_train_with_bags(&x, &y, &[identity], BaseLearner::Stump, 0).unwrap();
        let dist = vec![1.0 / x.n_rows() as f64; x.n_rows()];
        let y_pm: Vec<i8> = y.iter().map(|&l| if l == 0 { -1 } else { 1 }).collect();
        let (stump, _) = best_stump(&x, &y_pm, &dist).unwrap();
        assert_eq!(bagged.members, [stump]);
        for row in x.rows_iter() {
            let direct = if stump.predict(row) == 1 { 1 } else { 0 };
            assert_eq!(bagged.predict_label(row).unwrap(), direct);
        }
    }

    #[test]
    fn bagging_is_seed_deterministic() {
        let (x, y) = noisy_data(4, 30);
        let a = bagging_train(&x, &y, 9, BaseLearner::Stump, 42).unwrap();
        let b = bagging_train(&x, &y, 9, BaseLearner::Stump, 42).unwrap();
        assert_eq!(a, b);
        let c = bagging_train(&x, &y, 9, BaseLearner::Stump, 43).unwrap();
        assert_ne!(a.members, c.members);
    }

    #[test]
    fn bagging_beats_or_matches_one_stump_on_noisy_data() {
        let (train_x, train_y) = noisy_data(5, 60);
        let (test_x, test_y) = noisy_data(6, 60);
        let accuracy = |m: &BaggingModel| {
            test_x
                .rows_iter()
                .zip(&test_y)
                .filter(|(row, &label)| m.predict_label(row).unwrap() == label)
                .count() as f64
                / test_y.len() as f64
        };
        let single = bagging_train_with_bags(
            &train_x,
            &train_y,
            &[(0..train_x.n_rows()).collect()],
            BaseLearner::Stump,
            0,
        )
        .unwrap();
        let many = bagging_train(&train_x, &train_y, 25, BaseLearner::Stump, 7).unwrap();
        assert!(accuracy(&many) >= accuracy(&single));
    }

    #[test]
    fn vote_ties_fall_to_the_lower_label() {
        let x = col(&[0.0, 1.0, 2.0, 3.0]);
        let y = [0, 0, 1, 1];
        // two bags whose stumps disagree at x = 1.5
        let model = bagging_train_with_bags(
            &x,
            &y,
            &[vec![0, 0, 2, 2], vec![1, 1, 3, 3]],
            BaseLearner::Stump,
            0,
        )
        .unwrap();
        let votes: Vec<i8> = model.members.iter().map(|s| s.predict(&[1.5])).collect();
        assert_eq!(votes.iter().filter(|&&v| v == 1).count(), 1, "stumps must disagree");
        assert_eq!(model.predict_label(&[1.5]).unwrap(), 0);
    }

    /// Stage-2 wrapper that counts invocations.
    struct Counting<'a> {
        inner: &'a dyn LabelPredictor,
        calls: Cell<usize>,
    }

    impl LabelPredictor for Counting<'_> {
        fn predict_label(&self, x: &[f64]) -> Result<usize, DetectError> {
            self.calls.set(self.calls.get() + 1);
            self.inner.predict_label(x)
        }
    }

    #[test]
    fn stage_two_is_gated_by_stage_one() {
        let normal = col(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let stage1 = fit_oneclass_gaussian(&normal, 95.0).unwrap();
        let (stage2, _) = adaboost_train(&col(&[8.0, 9.0, 20.0, 21.0]), &[0, 0, 1, 1], 5).unwrap();
        let counting = Counting { inner: &stage2, calls: Cell::new(0) };

        let (score, verdict) = two_stage_detect(&stage1, &counting, &[2.0]).unwrap();
        assert_eq!(score, 0.0);
        assert_eq!(verdict, Verdict::Normal);
        assert_eq!(counting.calls.get(), 0);

        let (_, verdict) = two_stage_detect(&stage1, &counting, &[20.5]).unwrap();
        assert_eq!(verdict, Verdict::Anomaly { class: 1 });
        assert_eq!(counting.calls.get(), 1);
    }

    #[test]
    fn two_stage_model_round_trip_behavior() {
        let normal = col(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let stage1 = OneClass::Gaussian(fit_oneclass_gaussian(&normal, 95.0).unwrap());
        let (boost, _) = adaboost_train(&col(&[8.0, 9.0, 20.0, 21.0]), &[0, 0, 1, 1], 5).unwrap();
        let model = TwoStageModel::new(
            stage1,
            Ensemble::AdaBoost(boost),
            vec!["ratio_shift".into(), "spike".into()],
        );
        let (_, verdict) = model.detect(&[20.5]).unwrap();
        assert_eq!(verdict, Verdict::Anomaly { class: 1 });
        assert_eq!(verdict.render(&model.class_names), "spike");
        assert_eq!(Verdict::Normal.render(&model.class_names), "normal");
    }

    #[test]
    fn detection_csv_format() {
        let rows = vec![
            DetectionRow { window_start_row: 0, score: 0.5, verdict: "normal".into() },
            DetectionRow { window_start_row: 50, score: 32.0, verdict: "ratio_shift".into() },
        ];
        let mut buf = Vec::new();
        write_detection_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "window_start_row,score,verdict\n\
             0,5.0000000000000000e-1,normal\n\
             50,3.2000000000000000e1,ratio_shift\n"
        );
    }

    /// Independent selection oracle: repeatedly extract the minimum.
    fn oracle_mean_k_smallest(dists: &[f64], k: usize) -> f64 {
        let mut pool = dists.to_vec();
        let mut sum = 0.0;
        for _ in 0..k {
            let (idx, _) = pool
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| a.total_cmp(b))
                .unwrap();
            sum += pool.swap_remove(idx);
        }
        sum / k as f64
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn knn_score_matches_selection_oracle(
            refs in proptest::collection::vec(
                proptest::collection::vec(-50.0..50.0f64, 2),
                4..20,
            ),
            query in proptest::collection::vec(-50.0..50.0f64, 2),
            k in 1usize..3,
        ) {
            let x = Matrix::from_rows(&refs);
            let model = fit_knn_oneclass(&x, k, 95.0).unwrap();
            let dists: Vec<f64> = refs.iter().map(|r| euclidean(r, &query)).collect();
            let expect = oracle_mean_k_smallest(&dists, k);
            let got = model.score(&query).unwrap();
            prop_assert!((got - expect).abs() <= 1e-12);
        }

        #[test]
        fn distribution_stays_normalized_on_random_data(seed in 0u64..500) {
            let (x, y) = noisy_data(seed, 24);
            let (_, rounds) = adaboost_train(&x, &y, 8).unwrap();
            for round in &rounds {
                prop_assert!((round.dist_sum - 1.0).abs() <= 1e-12);
                prop_assert!(round.epsilon < 0.5);
            }
        }
    }
}
