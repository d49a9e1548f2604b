//! Scoring predictions against ground truth.

use crate::{out_writer, CsvTable, Failure, OrFail};
use std::path::{Path, PathBuf};

/// Collapses detection verdicts and 0/1 window labels onto a shared
/// normal/anomalous axis so the two file formats compare directly.
fn binarize(value: &str) -> String {
    if value == "normal" || value == "0" { "normal".into() } else { "anomalous".into() }
}

#[allow(clippy::too_many_arguments)]
pub fn eval(
    out: &Option<PathBuf>,
    predictions: &Path,
    prediction_column: &str,
    truth: Option<&Path>,
    truth_column: &str,
    scores_column: Option<&str>,
    positive: &str,
    binarize_detection: bool,
) -> Result<(), Failure> {
    let pred_table = CsvTable::load(predictions)?;
    let truth_table = match truth {
        Some(path) => Some(CsvTable::load(path)?),
        None => None,
    };
    let truth_table = truth_table.as_ref().unwrap_or(&pred_table);

    let mut preds = pred_table.column(prediction_column)?;
    let mut truths = truth_table.column(truth_column)?;
    let scores = scores_column.map(|c| pred_table.column_f64(c)).transpose()?;
    if binarize_detection {
        for v in preds.iter_mut().chain(truths.iter_mut()) {
            *v = binarize(v);
        }
    }

    let report =
        rvguard::eval::eval_metrics(&preds, &truths, positive, scores.as_deref())
            .or_input("computing metrics")?;
    log::info!(
        "accuracy {:.4}, recall {:.4}, fpr {:.4} over {} samples",
        report.accuracy,
        report.recall,
        report.false_positive_rate,
        report.n_samples
    );
    report.write_json(out_writer(out)?).or_input("writing report")
}
