//! Feature scoring and dimensionality reduction for counter and n-gram data.
//!
//! Three filter-style scorers (Fisher score, Pearson correlation, mutual
//! information) produce a [`FeatureScoreReport`] that ranks features by
//! predictive value, and [`select_events`] cuts that ranking down to a
//! hardware counter budget. [`pca_fit`] provides an unsupervised alternative:
//! project onto the top-k principal directions instead of dropping columns.
//!
//! All statistics use population (divisor N) variance so that small
//! hand-checked cases come out exact.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{self, Write};

use crate::linalg::{jacobi_eigen, Matrix};
use crate::util::fmt_f64;

/// Convergence tolerance handed to the Jacobi eigensolver by [`pca_fit`].
const PCA_EIGEN_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SelectError {
    /// Supervised scoring needs at least two distinct labels.
    #[error("supervised scoring requires at least two classes")]
    SingleClass,
    #[error("series lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    /// A constant series has no variance to correlate against.
    #[error("constant input has undefined correlation")]
    ConstantInput,
    #[error("component count {k} outside 1..={max}")]
    InvalidK { k: usize, max: usize },
}

/// Which scorer produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMethod {
    Fisher,
    Pearson,
    MutualInfo,
}

impl std::fmt::Display for ScoreMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScoreMethod::Fisher => "fisher",
            ScoreMethod::Pearson => "pearson",
            ScoreMethod::MutualInfo => "mutual_info",
        })
    }
}

/// Per-feature scores plus the induced ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScoreReport {
    pub method: ScoreMethod,
    pub scores: Vec<f64>,
    /// Feature indices by descending score; ties broken by ascending index.
    /// Always a permutation of `0..scores.len()`.
    pub ranking: Vec<usize>,
}

impl FeatureScoreReport {
    /// Builds a report from raw scores, deriving the ranking.
    ///
    /// Scores must not be NaN; the scorers in this module guarantee that
    /// (degenerate cases map to 0, +inf, or an error instead).
    pub fn new(method: ScoreMethod, scores: Vec<f64>) -> Self {
        debug_assert!(scores.iter().all(|s| !s.is_nan()));
        let mut ranking: Vec<usize> = (0..scores.len()).collect();
        // total_cmp is safe post the NaN guard; reverse gives descending
        // score, and the stable sort keeps tied indices ascending.
        ranking.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        FeatureScoreReport { method, scores, ranking }
    }

    /// Writes the report as `rank,feature,score` CSV, best feature first.
    ///
    /// Scores print with 17 significant digits so re-parsing is lossless;
    /// an infinite score prints as `inf`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "rank,feature,score")?;
        for (rank, &feature) in self.ranking.iter().enumerate() {
            writeln!(w, "{rank},{feature},{}", fmt_f64(self.scores[feature]))?;
        }
        Ok(())
    }
}

/// Groups row indices by label, preserving label order.
fn rows_by_class(y: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (row, &label) in y.iter().enumerate() {
        classes.entry(label).or_default().push(row);
    }
    classes
}

fn column_mean(x: &Matrix, rows: &[usize], col: usize) -> f64 {
    rows.iter().map(|&r| x.get(r, col)).sum::<f64>() / rows.len() as f64
}

/// Fisher score per feature: between-class spread over pooled within-class
/// variance, `F_j = Σ_c n_c (μ_cj − μ_j)² / Σ_c n_c σ²_cj` with population
/// variances.
///
/// A feature that separates classes perfectly has zero denominator and
/// positive numerator and scores +inf (ranked first); a feature that is
/// constant everywhere is 0/0 and scores 0.
///
/// Pre: `y.len() == x.n_rows()`, every class has at least two samples.
pub fn fisher_score(x: &Matrix, y: &[usize]) -> Result<FeatureScoreReport, SelectError> {
    assert_eq!(y.len(), x.n_rows(), "one label per sample row");
    let classes = rows_by_class(y);
    if classes.len() < 2 {
        return Err(SelectError::SingleClass);
    }
    let d = x.n_cols();
    let all_rows: Vec<usize> = (0..x.n_rows()).collect();
    let mut scores = Vec::with_capacity(d);
    for j in 0..d {
        let grand_mean = column_mean(x, &all_rows, j);
        let mut between = 0.0;
        let mut within = 0.0;
        for rows in classes.values() {
            let n = rows.len() as f64;
            let mean = column_mean(x, rows, j);
            let var = rows.iter().map(|&r| (x.get(r, j) - mean).powi(2)).sum::<f64>() / n;
            between += n * (mean - grand_mean).powi(2);
            within += n * var;
        }
        let score = if within == 0.0 {
            if between > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        } else {
            between / within
        };
        scores.push(score);
    }
    Ok(FeatureScoreReport::new(ScoreMethod::Fisher, scores))
}

/// Pearson correlation coefficient between two equal-length series.
///
/// Returns [`SelectError::ConstantInput`] instead of NaN when either series
/// has zero variance, so dead counters surface as errors rather than
/// poisoning downstream rankings.
pub fn pearson_corr(x: &[f64], y: &[f64]) -> Result<f64, SelectError> {
    if x.len() != y.len() {
        return Err(SelectError::LengthMismatch { left: x.len(), right: y.len() });
    }
    debug_assert!(x.len() >= 2, "correlation needs at least two points");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(SelectError::ConstantInput);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Scores each feature column by the magnitude of its correlation with the
/// labels. Sign is discarded: a strong negative correlation predicts just as
/// well as a strong positive one.
///
/// Any constant feature column (or constant label vector) is an error; see
/// [`pearson_corr`].
pub fn pearson_scores(x: &Matrix, y: &[usize]) -> Result<FeatureScoreReport, SelectError> {
    assert_eq!(y.len(), x.n_rows(), "one label per sample row");
    let labels: Vec<f64> = y.iter().map(|&c| c as f64).collect();
    let mut scores = Vec::with_capacity(x.n_cols());
    for j in 0..x.n_cols() {
        scores.push(pearson_corr(&x.column(j), &labels)?.abs());
    }
    Ok(FeatureScoreReport::new(ScoreMethod::Pearson, scores))
}

/// Mutual information between each binned feature and the labels, in nats.
///
/// Each feature is discretized into `bins` equal-width bins spanning its
/// [min, max] range (the max value lands in the last bin; a constant feature
/// collapses to a single bin and scores exactly 0). Empty contingency cells
/// contribute nothing.
///
/// Pre: `bins >= 2`, `y.len() == x.n_rows()`.
pub fn mutual_information(x: &Matrix, y: &[usize], bins: usize) -> FeatureScoreReport {
    assert!(bins >= 2, "binning needs at least two bins");
    assert_eq!(y.len(), x.n_rows(), "one label per sample row");
    let n = x.n_rows();
    let classes = rows_by_class(y);
    let class_index: BTreeMap<usize, usize> =
        classes.keys().enumerate().map(|(i, &c)| (c, i)).collect();
    let n_classes = classes.len();

    let mut scores = Vec::with_capacity(x.n_cols());
    for j in 0..x.n_cols() {
        let col = x.column(j);
        let min = col.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let n_bins = if min == max { 1 } else { bins };
        let mut joint = vec![0usize; n_bins * n_classes];
        for (row, &v) in col.iter().enumerate() {
            let b = if n_bins == 1 {
                0
            } else {
                (((v - min) / (max - min) * n_bins as f64) as usize).min(n_bins - 1)
            };
            joint[b * n_classes + class_index[&y[row]]] += 1;
        }
        let bin_totals: Vec<usize> =
            (0..n_bins).map(|b| joint[b * n_classes..(b + 1) * n_classes].iter().sum()).collect();
        let class_totals: Vec<usize> =
            (0..n_classes).map(|c| (0..n_bins).map(|b| joint[b * n_classes + c]).sum()).collect();
        let mut mi = 0.0;
        for b in 0..n_bins {
            for c in 0..n_classes {
                let count = joint[b * n_classes + c];
                if count == 0 {
                    continue;
                }
                let p_bc = count as f64 / n as f64;
                let p_b = bin_totals[b] as f64 / n as f64;
                let p_c = class_totals[c] as f64 / n as f64;
                mi += p_bc * (p_bc / (p_b * p_c)).ln();
            }
        }
        // Rounding can leave a tiny negative residue on independent tables.
        scores.push(mi.max(0.0));
    }
    FeatureScoreReport::new(ScoreMethod::MutualInfo, scores)
}

/// A fitted PCA projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    /// Per-feature training mean, subtracted before projection.
    pub mean: Vec<f64>,
    /// k orthonormal direction rows (k × d).
    pub components: Matrix,
    /// Explained population variance per component, non-increasing, >= 0.
    pub eigenvalues: Vec<f64>,
}

impl PcaModel {
    /// Number of retained components.
    pub fn k(&self) -> usize {
        self.components.n_rows()
    }

    /// Projects samples onto the component basis: `(X − mean) · componentsᵀ`.
    pub fn transform(&self, x: &Matrix) -> Matrix {
        assert_eq!(x.n_cols(), self.mean.len(), "feature count must match fit");
        let centered = self.center(x);
        centered.matmul(&self.components.transpose())
    }

    /// Maps score rows back to feature space: `scores · components + mean`.
    pub fn reconstruct(&self, scores: &Matrix) -> Matrix {
        assert_eq!(scores.n_cols(), self.k(), "score width must equal k");
        let mut out = scores.matmul(&self.components);
        for r in 0..out.n_rows() {
            for (j, &m) in self.mean.iter().enumerate() {
                out.row_mut(r)[j] += m;
            }
        }
        out
    }

    fn center(&self, x: &Matrix) -> Matrix {
        let mut centered = x.clone();
        for r in 0..centered.n_rows() {
            for (j, &m) in self.mean.iter().enumerate() {
                centered.row_mut(r)[j] -= m;
            }
        }
        centered
    }
}

/// Fits a k-component PCA to the rows of `x`.
///
/// Eigen-decomposes the population covariance of the mean-centered data with
/// a cyclic Jacobi sweep (tolerance 1e-12). Rank deficiency is fine: zero
/// eigenvalues simply mean the trailing components carry no variance.
///
/// Sign convention: each component is flipped, if needed, so its
/// largest-magnitude entry is positive (first such entry on ties). This makes
/// the fit deterministic down to the bit.
pub fn pca_fit(x: &Matrix, k: usize) -> Result<PcaModel, SelectError> {
    let n = x.n_rows();
    let d = x.n_cols();
    let max_k = n.min(d);
    if k < 1 || k > max_k {
        return Err(SelectError::InvalidK { k, max: max_k });
    }

    let mean: Vec<f64> = (0..d).map(|j| x.column(j).iter().sum::<f64>() / n as f64).collect();
    let mut centered = x.clone();
    for r in 0..n {
        for (j, &m) in mean.iter().enumerate() {
            centered.row_mut(r)[j] -= m;
        }
    }
    let mut cov = centered.transpose().matmul(&centered);
    for v in cov.data_mut() {
        *v /= n as f64;
    }

    let (eigenvalues, vectors) = jacobi_eigen(&cov, PCA_EIGEN_TOL);
    let mut components = Matrix::zeros(k, d);
    for i in 0..k {
        let mut row: Vec<f64> = vectors.row(i).to_vec();
        let lead = row
            .iter()
            .enumerate()
            .max_by(|(ai, a), (bi, b)| {
                a.abs().partial_cmp(&b.abs()).unwrap().then(bi.cmp(ai))
            })
            .map(|(_, &v)| v)
            .unwrap();
        if lead < 0.0 {
            for v in &mut row {
                *v = -*v;
            }
        }
        for (j, v) in row.into_iter().enumerate() {
            components.set(i, j, v);
        }
    }
    // Covariance eigenvalues are non-negative in exact arithmetic; clamp the
    // rounding residue so the stored spectrum honors that.
    let eigenvalues = eigenvalues.into_iter().take(k).map(|v| v.max(0.0)).collect();
    Ok(PcaModel { mean, components, eigenvalues })
}

/// Keeps the top `budget` features of a ranking, modeling the limit on how
/// many hardware counters can be read at once.
///
/// Pre: `budget >= 1`. A budget at or above the feature count keeps
/// everything.
pub fn select_events(report: &FeatureScoreReport, budget: usize) -> Vec<usize> {
    assert!(budget >= 1, "a zero-counter budget selects nothing");
    report.ranking.iter().take(budget).copied().collect()
}
