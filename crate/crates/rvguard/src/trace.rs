//! Hardware-performance-counter traces: ingestion, derived ratios, and
//! window statistics.
//!
//! A trace is a rectangular table of per-period event-count deltas sampled
//! at a uniform period. Behavioral features come from two derivations:
//! per-row ratios between two events (for example L3 misses per L1 miss)
//! and per-window summary statistics over fixed-length, strided windows.

use serde::{Deserialize, Serialize};
use std::io::{self, BufRead, Write};

use crate::linalg::Matrix;
use crate::util::fmt_f64;

/// Tick spacing may wobble by at most this fraction of the inferred period.
const PERIOD_TOLERANCE: f64 = 0.01;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TraceError {
    #[error("{path}:{line}: expected {expected} fields, found {found}")]
    RaggedRow { path: String, line: usize, expected: usize, found: usize },
    #[error("{path}:{line}: t_ns must increase strictly")]
    NonMonotonicTime { path: String, line: usize },
    #[error("{path}:{line}: negative count for {event}")]
    NegativeCount { path: String, line: usize, event: String },
    #[error(
        "{path}:{line}: tick spacing {found_ns} ns deviates from {expected_ns} ns by more than 1%"
    )]
    NonUniformPeriod { path: String, line: usize, expected_ns: u64, found_ns: u64 },
    #[error("event {name} is not in the trace")]
    UnknownEvent { name: String },
    #[error("window of {window_len} rows does not fit a {rows}-row series")]
    WindowTooLong { window_len: usize, rows: usize },
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("i/o: {0}")]
    Io(String),
}

impl From<io::Error> for TraceError {
    fn from(e: io::Error) -> Self {
        TraceError::Io(e.to_string())
    }
}

/// A counter event name in canonical upper-snake form (`L1D_MISS`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventId(String);

impl EventId {
    /// Canonicalizes (uppercases) and validates a name. Accepts `A-Z`,
    /// `0-9`, and `_`, requiring at least one letter.
    pub fn new(name: &str) -> Option<EventId> {
        let canon = name.trim().to_ascii_uppercase();
        let valid = !canon.is_empty()
            && canon.bytes().all(|b| b.is_ascii_uppercase() || b.is_ascii_digit() || b == b'_')
            && canon.bytes().any(|b| b.is_ascii_uppercase());
        valid.then_some(EventId(canon))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for EventId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// The counter set used by the synthetic workload generator and examples.
pub fn default_events() -> Vec<EventId> {
    ["CYCLES", "RETIRED_INSTR", "L1D_MISS", "L3_MISS", "BRANCH_MISS"]
        .iter()
        .map(|n| EventId::new(n).unwrap())
        .collect()
}

/// A sampled counter trace: one row of per-period deltas per tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpcTrace {
    pub sampling_period_ns: u64,
    pub events: Vec<EventId>,
    /// Row per tick, column per event, same order as `events`.
    pub samples: Vec<Vec<u64>>,
    /// Optional class for the whole trace (kept out of the CSV format).
    pub label: Option<String>,
    /// Optional per-row ground-truth anomaly flags.
    pub mask: Option<Vec<bool>>,
}

impl HpcTrace {
    pub fn n_rows(&self) -> usize {
        self.samples.len()
    }

    /// Column position of an event.
    pub fn event_index(&self, event: &EventId) -> Option<usize> {
        self.events.iter().position(|e| e == event)
    }

    /// One event's series as floats.
    pub fn column(&self, event: &EventId) -> Result<Vec<f64>, TraceError> {
        let idx = self
            .event_index(event)
            .ok_or_else(|| TraceError::UnknownEvent { name: event.to_string() })?;
        Ok(self.samples.iter().map(|row| row[idx] as f64).collect())
    }

    /// Writes the trace CSV: `t_ns,<EVENT>...[,anomaly]`, ticks re-based at
    /// zero (`t = row · period`).
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut header = String::from("t_ns");
        for e in &self.events {
            header.push(',');
            header.push_str(e.as_str());
        }
        if self.mask.is_some() {
            header.push_str(",anomaly");
        }
        writeln!(w, "{header}")?;
        for (i, row) in self.samples.iter().enumerate() {
            let mut line = (i as u64 * self.sampling_period_ns).to_string();
            for v in row {
                line.push(',');
                line.push_str(&v.to_string());
            }
            if let Some(mask) = &self.mask {
                line.push(',');
                line.push(if mask[i] { '1' } else { '0' });
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Parses a trace CSV (`t_ns,<EVENT>...[,anomaly]`).
///
/// Ticks must increase strictly and uniformly: the first delta sets the
/// sampling period and later deltas may deviate from it by at most 1%.
/// Counts are non-negative integers; at least two rows are required (a
/// single tick has no period). `path` is used only for error context.
pub fn load_trace_csv<R: BufRead>(r: R, path: &str) -> Result<HpcTrace, TraceError> {
    let parse = |line: usize, msg: String| TraceError::Parse {
        path: path.to_owned(),
        line,
        msg,
    };
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse(1, "empty trace file".into()))?;
    let header = header?;
    let mut fields: Vec<&str> = header.split(',').collect();
    if fields.first() != Some(&"t_ns") {
        return Err(parse(1, "header must start with t_ns".into()));
    }
    let has_mask = fields.last() == Some(&"anomaly");
    if has_mask {
        fields.pop();
    }
    let events: Vec<EventId> = fields[1..]
        .iter()
        .map(|name| {
            EventId::new(name).ok_or_else(|| parse(1, format!("invalid event name {name:?}")))
        })
        .collect::<Result<_, _>>()?;
    if events.is_empty() {
        return Err(parse(1, "trace has no event columns".into()));
    }
    for (i, e) in events.iter().enumerate() {
        if events[..i].contains(e) {
            return Err(parse(1, format!("duplicate event {e}")));
        }
    }
    let width = 1 + events.len() + usize::from(has_mask);

    let mut samples: Vec<Vec<u64>> = Vec::new();
    let mut mask: Vec<bool> = Vec::new();
    let mut times: Vec<u64> = Vec::new();
    let mut period: Option<u64> = None;
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(TraceError::RaggedRow {
                path: path.to_owned(),
                line: lineno,
                expected: width,
                found: fields.len(),
            });
        }
        let t: u64 = fields[0]
            .parse()
            .map_err(|_| parse(lineno, format!("bad timestamp {:?}", fields[0])))?;
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(TraceError::NonMonotonicTime { path: path.to_owned(), line: lineno });
            }
            let delta = t - prev;
            match period {
                None => period = Some(delta),
                Some(p) => {
                    if (delta as f64 - p as f64).abs() > PERIOD_TOLERANCE * p as f64 {
                        return Err(TraceError::NonUniformPeriod {
                            path: path.to_owned(),
                            line: lineno,
                            expected_ns: p,
                            found_ns: delta,
                        });
                    }
                }
            }
        }
        times.push(t);

        let mut row = Vec::with_capacity(events.len());
        for (event, field) in events.iter().zip(&fields[1..1 + events.len()]) {
            let count: i64 = field
                .parse()
                .map_err(|_| parse(lineno, format!("bad count {field:?}")))?;
            if count < 0 {
                return Err(TraceError::NegativeCount {
                    path: path.to_owned(),
                    line: lineno,
                    event: event.to_string(),
                });
            }
            row.push(count as u64);
        }
        samples.push(row);
        if has_mask {
            match *fields.last().unwrap() {
                "0" => mask.push(false),
                "1" => mask.push(true),
                other => return Err(parse(lineno, format!("anomaly flag {other:?} not 0/1"))),
            }
        }
    }
    let Some(period) = period else {
        return Err(parse(1, "need at least two sample rows to infer the period".into()));
    };
    Ok(HpcTrace {
        sampling_period_ns: period,
        events,
        samples,
        label: None,
        mask: has_mask.then_some(mask),
    })
}

/// What to do with a zero denominator in [`derive_ratio`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonPolicy {
    /// Emit 0.
    Zero,
    /// Emit `num / (den + 1)`.
    Epsilon,
}

impl std::str::FromStr for EpsilonPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "zero" => Ok(EpsilonPolicy::Zero),
            "epsilon" => Ok(EpsilonPolicy::Epsilon),
            other => Err(format!("unknown epsilon policy {other:?}")),
        }
    }
}

/// Row-wise `numerator / denominator` between two events of a trace.
///
/// Never produces a non-finite value: zero denominators follow `policy`.
pub fn derive_ratio(
    trace: &HpcTrace,
    numerator: &EventId,
    denominator: &EventId,
    policy: EpsilonPolicy,
) -> Result<Vec<f64>, TraceError> {
    let num = trace.column(numerator)?;
    let den = trace.column(denominator)?;
    Ok(num
        .iter()
        .zip(&den)
        .map(|(&n, &d)| {
            if d == 0.0 {
                match policy {
                    EpsilonPolicy::Zero => 0.0,
                    EpsilonPolicy::Epsilon => n / (d + 1.0),
                }
            } else {
                n / d
            }
        })
        .collect())
}

/// Named float series, row per tick — the input shape for [`windowize`].
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMatrix {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SeriesMatrix {
    /// All events of a trace, as floats, in trace order.
    pub fn from_trace(trace: &HpcTrace) -> SeriesMatrix {
        SeriesMatrix {
            columns: trace.events.iter().map(|e| e.to_string()).collect(),
            rows: trace
                .samples
                .iter()
                .map(|row| row.iter().map(|&v| v as f64).collect())
                .collect(),
        }
    }

    /// Appends a derived column (for example a ratio series).
    pub fn push_column(&mut self, name: &str, values: &[f64]) {
        assert_eq!(values.len(), self.rows.len(), "column length must match rows");
        assert!(!self.columns.iter().any(|c| c == name), "duplicate column {name}");
        self.columns.push(name.to_owned());
        for (row, &v) in self.rows.iter_mut().zip(values) {
            row.push(v);
        }
    }

    /// A single named column as a one-column matrix.
    pub fn from_column(name: &str, values: &[f64]) -> SeriesMatrix {
        SeriesMatrix {
            columns: vec![name.to_owned()],
            rows: values.iter().map(|&v| vec![v]).collect(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }
}

/// Per-window summary statistic. The emit order is fixed to the declaration
/// order here regardless of how a config lists them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stat {
    Mean,
    Std,
    Min,
    Max,
    Slope,
}

impl std::fmt::Display for Stat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stat::Mean => "mean",
            Stat::Std => "std",
            Stat::Min => "min",
            Stat::Max => "max",
            Stat::Slope => "slope",
        })
    }
}

impl std::str::FromStr for Stat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mean" => Ok(Stat::Mean),
            "std" => Ok(Stat::Std),
            "min" => Ok(Stat::Min),
            "max" => Ok(Stat::Max),
            "slope" => Ok(Stat::Slope),
            other => Err(format!("unknown stat {other:?}")),
        }
    }
}

/// Windowing parameters. `stats` is treated as a set; emission order is
/// always mean, std, min, max, slope.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowConfig {
    pub window_len: usize,
    pub stride: usize,
    stats: Vec<Stat>,
}

impl WindowConfig {
    /// Pre: `window_len >= 1`, `stride >= 1`, `stats` non-empty.
    pub fn new(window_len: usize, stride: usize, stats: &[Stat]) -> WindowConfig {
        assert!(window_len >= 1, "window must cover at least one row");
        assert!(stride >= 1, "stride must advance");
        assert!(!stats.is_empty(), "at least one statistic required");
        let mut stats = stats.to_vec();
        stats.sort();
        stats.dedup();
        WindowConfig { window_len, stride, stats }
    }

    pub fn stats(&self) -> &[Stat] {
        &self.stats
    }
}

fn stat_value(stat: Stat, window: &[f64]) -> f64 {
    let n = window.len() as f64;
    match stat {
        Stat::Mean => window.iter().sum::<f64>() / n,
        Stat::Std => {
            let mean = window.iter().sum::<f64>() / n;
            (window.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
        }
        Stat::Min => window.iter().cloned().fold(f64::INFINITY, f64::min),
        Stat::Max => window.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        Stat::Slope => {
            // least-squares slope against the window index 0..n-1
            let t_mean = (n - 1.0) / 2.0;
            let x_mean = window.iter().sum::<f64>() / n;
            let mut num = 0.0;
            let mut den = 0.0;
            for (i, &x) in window.iter().enumerate() {
                let dt = i as f64 - t_mean;
                num += dt * (x - x_mean);
                den += dt * dt;
            }
            if den == 0.0 {
                0.0
            } else {
                num / den
            }
        }
    }
}

/// Windowed summary features: one row per window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedFeatures {
    /// `<stat>.<series>` names, stat-major then column-minor.
    pub columns: Vec<String>,
    pub features: Matrix,
    /// First source row of each window.
    pub starts: Vec<usize>,
    pub window_len: usize,
}

impl WindowedFeatures {
    /// `(start_row, len)` spans of the windows.
    pub fn spans(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.starts.iter().map(move |&s| (s, self.window_len))
    }

    /// Writes `window_start_row,<stat.series>...[,label]` CSV with 17
    /// significant digits per value.
    pub fn write_csv<W: Write>(&self, labels: Option<&[bool]>, mut w: W) -> io::Result<()> {
        if let Some(labels) = labels {
            assert_eq!(labels.len(), self.starts.len(), "one label per window");
        }
        let mut header = String::from("window_start_row");
        for c in &self.columns {
            header.push(',');
            header.push_str(c);
        }
        if labels.is_some() {
            header.push_str(",label");
        }
        writeln!(w, "{header}")?;
        for (i, &start) in self.starts.iter().enumerate() {
            let mut line = start.to_string();
            for v in self.features.row(i) {
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
}

/// Contents of a windowed-feature CSV: column names, the feature matrix,
/// per-window start rows, and labels when the file carries them.
pub type WindowedTable = (Vec<String>, Matrix, Vec<usize>, Option<Vec<bool>>);

/// Parses a windowed-feature CSV back into its parts. `path` is used only
/// for error context.
pub fn read_windowed_csv<R: BufRead>(r: R, path: &str) -> Result<WindowedTable, TraceError> {
    let parse = |line: usize, msg: String| TraceError::Parse {
        path: path.to_owned(),
        line,
        msg,
    };
    let mut lines = r.lines().enumerate();
    let (_, header) =
        lines.next().ok_or_else(|| parse(1, "empty windowed-feature file".into()))?;
    let header = header?;
    let mut fields: Vec<&str> = header.split(',').collect();
    if fields.first() != Some(&"window_start_row") {
        return Err(parse(1, "header must start with window_start_row".into()));
    }
    let has_labels = fields.last() == Some(&"label");
    if has_labels {
        fields.pop();
    }
    let columns: Vec<String> = fields[1..].iter().map(|s| s.to_string()).collect();
    if columns.is_empty() {
        return Err(parse(1, "no feature columns".into()));
    }
    let width = 1 + columns.len() + usize::from(has_labels);

    let mut features = Matrix::zeros(0, columns.len());
    let mut starts = Vec::new();
    let mut labels = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(TraceError::RaggedRow {
                path: path.to_owned(),
                line: lineno,
                expected: width,
                found: fields.len(),
            });
        }
        let start: usize = fields[0]
            .parse()
            .map_err(|_| parse(lineno, format!("bad start row {:?}", fields[0])))?;
        let row: Vec<f64> = fields[1..1 + columns.len()]
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| parse(lineno, "bad feature value".into()))?;
        starts.push(start);
        features.push_row(&row);
        if has_labels {
            match *fields.last().unwrap() {
                "0" => labels.push(false),
                "1" => labels.push(true),
                other => return Err(parse(lineno, format!("label {other:?} not 0/1"))),
            }
        }
    }
    Ok((columns, features, starts, has_labels.then_some(labels)))
}

/// Slices `series` into fixed-length windows at stride offsets and emits the
/// configured statistics per window.
///
/// Windows start at rows 0, stride, 2·stride, …; a final partial window is
/// dropped, so the window count is `(rows − window_len) / stride + 1`.
/// Output columns are stat-major, series-minor: all means, then all stds,
/// and so on.
pub fn windowize(series: &SeriesMatrix, cfg: &WindowConfig) -> Result<WindowedFeatures, TraceError> {
    let rows = series.n_rows();
    if cfg.window_len > rows {
        return Err(TraceError::WindowTooLong { window_len: cfg.window_len, rows });
    }
    let columns: Vec<String> = cfg
        .stats
        .iter()
        .flat_map(|s| series.columns.iter().map(move |c| format!("{s}.{c}")))
        .collect();

    let mut features = Matrix::zeros(0, columns.len());
    let mut starts = Vec::new();
    let mut start = 0;
    while start + cfg.window_len <= rows {
        let mut out = Vec::with_capacity(columns.len());
        for &stat in &cfg.stats {
            for col in 0..series.columns.len() {
                let window: Vec<f64> =
                    (start..start + cfg.window_len).map(|r| series.rows[r][col]).collect();
                out.push(stat_value(stat, &window));
            }
        }
        features.push_row(&out);
        starts.push(start);
        start += cfg.stride;
    }
    Ok(WindowedFeatures { columns, features, starts, window_len: cfg.window_len })
}

/// Labels each window from a per-row mask: anomalous when at least half of
/// its rows are masked.
pub fn label_windows(mask: &[bool], windows: &WindowedFeatures) -> Vec<bool> {
    windows
        .spans()
        .map(|(start, len)| {
            let hot = mask[start..start + len].iter().filter(|&&m| m).count();
            2 * hot >= len
        })
        .collect()
}
