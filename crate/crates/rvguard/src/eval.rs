//! Classification metrics and evaluation reports.
//!
//! Labels are compared as strings so the same report works for static
//! classifier classes and detector verdicts. Binary-style rates (precision,
//! recall, F1, false-positive rate) are computed one-vs-rest against a
//! designated positive class; ratios with empty denominators are reported
//! as 0.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::io::{self, Write};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EvalError {
    #[error("prediction count {left} does not match truth count {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("positive class {class:?} appears in neither predictions nor truth")]
    UnknownPositiveClass { class: String },
}

/// Metrics over one prediction run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub false_positive_rate: f64,
    /// Absent without scores or when only one class is present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auc: Option<f64>,
    /// Class names indexing the confusion matrix, sorted.
    pub classes: Vec<String>,
    /// The class the binary rates treat as positive.
    pub positive_class: String,
    /// `confusion[t][p]`: count with truth class t predicted as class p.
    pub confusion: Vec<Vec<u64>>,
    pub n_samples: usize,
}

/// ROC area by trapezoidal integration, sweeping thresholds across unique
/// score values (ties move as one group). None when either class is absent.
fn roc_auc(scores: &[f64], is_positive: &[bool]) -> Option<f64> {
    let p: u64 = is_positive.iter().filter(|&&b| b).count() as u64;
    let n = is_positive.len() as u64 - p;
    if p == 0 || n == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut area = 0.0;
    let (mut tp, mut fp) = (0u64, 0u64);
    let (mut prev_tpr, mut prev_fpr) = (0.0, 0.0);
    let mut i = 0;
    while i < order.len() {
        // advance over one tied score group
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if is_positive[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let tpr = tp as f64 / p as f64;
        let fpr = fp as f64 / n as f64;
        area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        prev_tpr = tpr;
        prev_fpr = fpr;
    }
    Some(area)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Standard metrics for one prediction run.
///
/// Classes are the sorted union of predicted and true labels; the positive
/// class must be among them. With scores present (higher = more positive),
/// AUC is added for the positive class. Pre: non-empty input.
pub fn eval_metrics(
    predictions: &[String],
    truth: &[String],
    positive: &str,
    scores: Option<&[f64]>,
) -> Result<EvalReport, EvalError> {
    if predictions.len() != truth.len() {
        return Err(EvalError::LengthMismatch { left: predictions.len(), right: truth.len() });
    }
    if let Some(s) = scores {
        if s.len() != truth.len() {
            return Err(EvalError::LengthMismatch { left: s.len(), right: truth.len() });
        }
    }
    assert!(!truth.is_empty(), "cannot evaluate an empty run");

    let classes: Vec<String> = predictions
        .iter()
        .chain(truth)
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if !classes.iter().any(|c| c == positive) {
        return Err(EvalError::UnknownPositiveClass { class: positive.to_string() });
    }
    let index = |name: &str| classes.iter().position(|c| c == name).unwrap();

    let k = classes.len();
    let mut confusion = vec![vec![0u64; k]; k];
    for (pred, actual) in predictions.iter().zip(truth) {
        confusion[index(actual)][index(pred)] += 1;
    }

    let n = truth.len() as u64;
    let correct: u64 = (0..k).map(|i| confusion[i][i]).sum();
    let pos = index(positive);
    let tp = confusion[pos][pos];
    let fp: u64 = (0..k).filter(|&t| t != pos).map(|t| confusion[t][pos]).sum();
    let fnn: u64 = (0..k).filter(|&p| p != pos).map(|p| confusion[pos][p]).sum();
    let tn = n - tp - fp - fnn;

    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fnn);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };

    let auc = scores.and_then(|s| {
        let is_positive: Vec<bool> = truth.iter().map(|t| t == positive).collect();
        roc_auc(s, &is_positive)
    });

    Ok(EvalReport {
        accuracy: ratio(correct, n),
        precision,
        recall,
        f1,
        false_positive_rate: ratio(fp, fp + tn),
        auc,
        classes,
        positive_class: positive.to_string(),
        confusion,
        n_samples: truth.len(),
    })
}

impl EvalReport {
    /// Pretty JSON plus trailing newline.
    pub fn write_json<W: Write>(&self, mut w: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)
    }

    pub fn read_json<R: io::Read>(r: R) -> serde_json::Result<EvalReport> {
        serde_json::from_reader(r)
    }
}
