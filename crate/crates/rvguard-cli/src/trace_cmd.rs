//! Counter-trace pipeline: windowing, feature selection, detectors.

use crate::{
    create_writer, detect_failure, fmt_f64, input_error, open_reader, out_writer, parse_list,
    persist_failure, require_out, DetectorKind, Failure, MethodKind, OrFail, Stage1Kind,
    Stage2Kind,
};
use anyhow::anyhow;
use rvguard::detect::{
    adaboost_train, bagging_train, fit_knn_oneclass, fit_oneclass_gaussian, write_detection_csv,
    BaseLearner, DetectionRow, Ensemble, LabelPredictor, OneClass, TwoStageModel,
};
use rvguard::linalg::Matrix;
use rvguard::persist::{load_model, save_model, AnyModel, ModelFile};
use rvguard::select::{
    fisher_score, mutual_information, pca_fit, pearson_scores, select_events, FeatureScoreReport,
};
use rvguard::trace::{
    derive_ratio, label_windows, load_trace_csv, read_windowed_csv, windowize as window_series,
    EpsilonPolicy, EventId, SeriesMatrix, Stat, WindowConfig,
};
use std::io::Write;
use std::path::{Path, PathBuf};

pub fn trace_info(out: &Option<PathBuf>, trace: &Path) -> Result<(), Failure> {
    let path = trace.display().to_string();
    let trace = load_trace_csv(open_reader(trace)?, &path)
        .or_input(&format!("reading trace {path}"))?;
    let mut w = out_writer(out)?;
    let render = |r: std::io::Result<()>| r.or_input("writing summary");

    render(writeln!(w, "rows: {}", trace.n_rows()))?;
    render(writeln!(w, "period_ns: {}", trace.sampling_period_ns))?;
    render(writeln!(w, "events: {}", trace.events.len()))?;
    render(writeln!(w, "event,mean,std,min,max"))?;
    for event in &trace.events {
        let col = trace.column(event).or_input("reading column")?;
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in &col {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        render(writeln!(
            w,
            "{},{},{},{},{}",
            event,
            fmt_f64(mean),
            fmt_f64(var.sqrt()),
            fmt_f64(lo),
            fmt_f64(hi)
        ))?;
    }
    if let Some(mask) = &trace.mask {
        render(writeln!(w, "anomalous_rows: {}", mask.iter().filter(|&&m| m).count()))?;
    }
    Ok(())
}

fn parse_event(name: &str) -> Result<EventId, Failure> {
    EventId::new(name)
        .ok_or_else(|| input_error(anyhow!("invalid event name {name:?}")))
}

#[allow(clippy::too_many_arguments)]
pub fn windowize(
    out: &Option<PathBuf>,
    trace: &Path,
    window_len: usize,
    stride: usize,
    stats: &str,
    events: Option<&str>,
    ratios: &[String],
    ratio_policy: EpsilonPolicy,
) -> Result<(), Failure> {
    if window_len == 0 || stride == 0 {
        return Err(input_error(anyhow!("--window-len and --stride must be positive")));
    }
    let stats: Vec<Stat> = parse_list(stats, "stat")?;
    if stats.is_empty() {
        return Err(input_error(anyhow!("--stats must name at least one statistic")));
    }

    let path = trace.display().to_string();
    let trace = load_trace_csv(open_reader(trace)?, &path)
        .or_input(&format!("reading trace {path}"))?;

    let selected: Vec<EventId> = match events {
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(parse_event)
            .collect::<Result<_, _>>()?,
        None => trace.events.clone(),
    };
    if selected.is_empty() && ratios.is_empty() {
        return Err(input_error(anyhow!("nothing to window: no events and no ratios")));
    }

    let mut series: Option<SeriesMatrix> = None;
    let mut add = |name: &str, values: &[f64]| match &mut series {
        Some(s) => s.push_column(name, values),
        None => series = Some(SeriesMatrix::from_column(name, values)),
    };
    for event in &selected {
        let col = trace
            .column(event)
            .or_input(&format!("event {event} not in trace"))?;
        add(event.as_str(), &col);
    }
    for spec in ratios {
        let (num, den) = spec
            .split_once('/')
            .ok_or_else(|| input_error(anyhow!("--ratio must look like NUM/DEN, got {spec:?}")))?;
        let num = parse_event(num.trim())?;
        let den = parse_event(den.trim())?;
        let col = derive_ratio(&trace, &num, &den, ratio_policy)
            .or_input(&format!("deriving ratio {spec}"))?;
        add(&format!("{num}_per_{den}"), &col);
    }
    let series = series.expect("at least one column");

    let cfg = WindowConfig::new(window_len, stride, &stats);
    let windows = window_series(&series, &cfg).or_input("windowing")?;
    let labels = trace.mask.as_ref().map(|mask| label_windows(mask, &windows));
    log::info!(
        "{} windows of {} columns ({} labeled anomalous)",
        windows.starts.len(),
        windows.columns.len(),
        labels.as_ref().map_or(0, |l| l.iter().filter(|&&b| b).count())
    );
    windows
        .write_csv(labels.as_deref(), out_writer(out)?)
        .or_input("writing windowed features")
}

fn load_windowed(features: &Path) -> Result<rvguard::trace::WindowedTable, Failure> {
    let path = features.display().to_string();
    read_windowed_csv(open_reader(features)?, &path)
        .or_input(&format!("reading windowed features {path}"))
}

fn require_labels(labels: Option<Vec<bool>>, what: &str) -> Result<Vec<usize>, Failure> {
    labels
        .map(|l| l.iter().map(|&b| usize::from(b)).collect())
        .ok_or_else(|| input_error(anyhow!("{what} needs a labeled feature file")))
}

/// Writes a windowed-feature CSV from parts (column subset or projection).
fn write_feature_csv<W: Write>(
    mut w: W,
    columns: &[String],
    features: &Matrix,
    starts: &[usize],
    labels: Option<&[bool]>,
) -> std::io::Result<()> {
    let mut header = String::from("window_start_row");
    for c in columns {
        header.push(',');
        header.push_str(c);
    }
    if labels.is_some() {
        header.push_str(",label");
    }
    writeln!(w, "{header}")?;
    for (i, &start) in starts.iter().enumerate() {
        let mut line = start.to_string();
        for v in features.row(i) {
            line.push(',');
            line.push_str(&fmt_f64(*v));
        }
        if let Some(labels) = labels {
            line.push(',');
            line.push(if labels[i] { '1' } else { '0' });
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn select_features(
    out: &Option<PathBuf>,
    method: MethodKind,
    features: &Path,
    budget: usize,
    bins: usize,
    reduced: Option<&Path>,
    transformed: Option<&Path>,
) -> Result<(), Failure> {
    if budget == 0 {
        return Err(input_error(anyhow!("--budget must be at least 1")));
    }
    let (columns, x, starts, labels) = load_windowed(features)?;

    if method == MethodKind::Pca {
        let model = pca_fit(&x, budget).or_input("fitting pca")?;
        let path = require_out(out, "select-features pca")?;
        save_model(&ModelFile::new(AnyModel::Pca(model.clone()), vec![]), path)
            .map_err(|e| persist_failure(e, "saving pca model"))?;
        if let Some(tr) = transformed {
            let scores = model.transform(&x);
            let names: Vec<String> = (0..model.k()).map(|i| format!("pc{i}")).collect();
            write_feature_csv(
                create_writer(tr)?,
                &names,
                &scores,
                &starts,
                labels.as_deref(),
            )
            .or_input("writing projected features")?;
        }
        return Ok(());
    }

    let y = require_labels(labels.clone(), "feature scoring")?;
    let report: FeatureScoreReport = match method {
        MethodKind::Fisher => fisher_score(&x, &y).or_input("scoring features")?,
        MethodKind::Pearson => pearson_scores(&x, &y).or_input("scoring features")?,
        MethodKind::Mi => {
            if bins < 2 {
                return Err(input_error(anyhow!("--bins must be at least 2")));
            }
            mutual_information(&x, &y, bins)
        }
        MethodKind::Pca => unreachable!(),
    };
    let selected = select_events(&report, budget.min(columns.len()));
    let names: Vec<&str> = selected.iter().map(|&i| columns[i].as_str()).collect();
    log::info!("selected by {}: {}", report.method, names.join(", "));

    report.write_csv(out_writer(out)?).or_input("writing score report")?;

    if let Some(reduced_path) = reduced {
        let sub_columns: Vec<String> = selected.iter().map(|&i| columns[i].clone()).collect();
        let rows: Vec<Vec<f64>> = (0..x.n_rows())
            .map(|r| selected.iter().map(|&c| x.get(r, c)).collect())
            .collect();
        let sub = Matrix::from_rows(&rows);
        write_feature_csv(
            create_writer(reduced_path)?,
            &sub_columns,
            &sub,
            &starts,
            labels.as_deref(),
        )
        .or_input("writing reduced features")?;
    }
    Ok(())
}

/// Rows a one-class detector trains on: the unflagged ones, or everything
/// when the file is unlabeled.
fn normal_rows(x: &Matrix, labels: Option<&[bool]>) -> Result<Matrix, Failure> {
    let rows: Vec<Vec<f64>> = match labels {
        Some(labels) => x
            .rows_iter()
            .zip(labels)
            .filter(|(_, &anomalous)| !anomalous)
            .map(|(r, _)| r.to_vec())
            .collect(),
        None => x.rows_iter().map(<[f64]>::to_vec).collect(),
    };
    if rows.is_empty() {
        return Err(input_error(anyhow!("no normal rows to train on")));
    }
    Ok(Matrix::from_rows(&rows))
}

#[allow(clippy::too_many_arguments)]
pub fn train_detector(
    out: &Option<PathBuf>,
    kind: DetectorKind,
    features: &Path,
    percentile: f64,
    k: usize,
    rounds: usize,
    bags: usize,
    base: BaseLearner,
    stage1: Stage1Kind,
    stage2: Stage2Kind,
    anomaly_class: &str,
    seed: u64,
) -> Result<(), Failure> {
    if !(percentile > 0.0 && percentile <= 100.0) {
        return Err(input_error(anyhow!("--percentile must lie in (0, 100]")));
    }
    let (_, x, _, labels) = load_windowed(features)?;

    let fit_stage1 = |which: Stage1Kind| -> Result<OneClass, Failure> {
        let xn = normal_rows(&x, labels.as_deref())?;
        match which {
            Stage1Kind::Gauss => fit_oneclass_gaussian(&xn, percentile)
                .map(OneClass::Gaussian)
                .map_err(|e| detect_failure(e, "fitting gaussian detector")),
            Stage1Kind::Knn => {
                if k == 0 {
                    return Err(input_error(anyhow!("--k must be at least 1")));
                }
                fit_knn_oneclass(&xn, k, percentile)
                    .map(OneClass::Knn)
                    .map_err(|e| detect_failure(e, "fitting knn detector"))
            }
        }
    };
    let fit_stage2 = |which: Stage2Kind, y: &[usize]| -> Result<Ensemble, Failure> {
        match which {
            Stage2Kind::Adaboost => {
                if rounds == 0 {
                    return Err(input_error(anyhow!("--rounds must be at least 1")));
                }
                adaboost_train(&x, y, rounds)
                    .map(|(m, _)| Ensemble::AdaBoost(m))
                    .map_err(|e| detect_failure(e, "boosting"))
            }
            Stage2Kind::Bagging => {
                if bags == 0 {
                    return Err(input_error(anyhow!("--bags must be at least 1")));
                }
                bagging_train(&x, y, bags, base, seed)
                    .map(Ensemble::Bagging)
                    .map_err(|e| detect_failure(e, "bagging"))
            }
        }
    };

    let model = match kind {
        DetectorKind::Gauss => match fit_stage1(Stage1Kind::Gauss)? {
            OneClass::Gaussian(m) => AnyModel::Gauss(m),
            OneClass::Knn(_) => unreachable!(),
        },
        DetectorKind::Knn => match fit_stage1(Stage1Kind::Knn)? {
            OneClass::Knn(m) => AnyModel::Knn(m),
            OneClass::Gaussian(_) => unreachable!(),
        },
        DetectorKind::Adaboost => {
            let y = require_labels(labels.clone(), "adaboost")?;
            match fit_stage2(Stage2Kind::Adaboost, &y)? {
                Ensemble::AdaBoost(m) => AnyModel::AdaBoost(m),
                Ensemble::Bagging(_) => unreachable!(),
            }
        }
        DetectorKind::Bagging => {
            let y = require_labels(labels.clone(), "bagging")?;
            match fit_stage2(Stage2Kind::Bagging, &y)? {
                Ensemble::Bagging(m) => AnyModel::Bagging(m),
                Ensemble::AdaBoost(_) => unreachable!(),
            }
        }
        DetectorKind::TwoStage => {
            let y = require_labels(labels.clone(), "two-stage training")?;
            let gate = fit_stage1(stage1)?;
            let ensemble = fit_stage2(stage2, &y)?;
            AnyModel::TwoStage(TwoStageModel::new(
                gate,
                ensemble,
                vec!["normal".to_string(), anomaly_class.to_string()],
            ))
        }
    };

    let path = require_out(out, "train-detector")?;
    let class_names = vec!["normal".to_string(), anomaly_class.to_string()];
    save_model(&ModelFile::new(model, class_names), path)
        .map_err(|e| persist_failure(e, "saving model"))
}

pub fn detect(out: &Option<PathBuf>, model: &Path, features: &Path) -> Result<(), Failure> {
    let file = load_model(model).map_err(|e| persist_failure(e, "loading model"))?;
    let (_, x, starts, _) = load_windowed(features)?;
    let normal_name = if file.class_names.is_empty() { "normal".into() } else { file.class_name(0) };
    let anomaly_name =
        if file.class_names.len() < 2 { "anomalous".into() } else { file.class_name(1) };

    let mut rows = Vec::with_capacity(x.n_rows());
    for (i, row) in x.rows_iter().enumerate() {
        let (score, verdict) = match &file.model {
            AnyModel::Gauss(_) | AnyModel::Knn(_) => {
                let scorer = file.model.as_scorer().expect("one-class model");
                let (score, anomalous) =
                    scorer.detect(row).map_err(|e| detect_failure(e, "scoring"))?;
                (score, if anomalous { anomaly_name.clone() } else { normal_name.clone() })
            }
            AnyModel::TwoStage(m) => {
                let (score, verdict) =
                    m.detect(row).map_err(|e| detect_failure(e, "detecting"))?;
                (score, verdict.render(&m.class_names))
            }
            AnyModel::AdaBoost(m) => {
                let score = m.decision_value(row).map_err(|e| detect_failure(e, "scoring"))?;
                let label = m.predict_label(row).map_err(|e| detect_failure(e, "voting"))?;
                (score, file.class_name(label))
            }
            AnyModel::Bagging(m) => {
                let label = m.predict_label(row).map_err(|e| detect_failure(e, "voting"))?;
                let votes = m.members.iter().filter(|s| s.predict(row) == 1).count();
                (votes as f64 / m.members.len() as f64, file.class_name(label))
            }
            other => {
                return Err(input_error(anyhow!(
                    "{}: detect needs a detector model, found {:?}",
                    model.display(),
                    other.kind()
                )))
            }
        };
        rows.push(DetectionRow { window_start_row: starts[i], score, verdict });
    }
    write_detection_csv(&rows, out_writer(out)?).or_input("writing detection report")
}
