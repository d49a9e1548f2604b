//! Deterministic generators for counter traces and opcode corpora.
//!
//! Real malware corpora and counter hardware are not available on a desk, so
//! every pipeline here trains and evaluates against synthetic stand-ins:
//! phase-structured traces with precisely known injected anomalies, and
//! labeled opcode corpora drawn from per-family Markov chains. Everything is
//! a pure function of (spec, seed); the same call is bit-identical across
//! runs.
//!
//! Counts are truncated rounded Gaussians rather than Poisson draws: one
//! fewer special function, and detector tests only need controllable means
//! and spreads. Anomaly separation magnitudes are calibration knobs of this
//! harness, not measured hardware behavior.

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use crate::decode::{self, OpcodeSequence};
use crate::trace::{EventId, HpcTrace};
use crate::util::mean_var;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SynthError {
    #[error("span start {start} length {length} exceeds {rows} trace rows")]
    SpanOutOfRange { start: usize, length: usize, rows: usize },
    #[error("event {name:?} is not in the trace")]
    UnknownEvent { name: String },
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<io::Error> for SynthError {
    fn from(e: io::Error) -> Self {
        SynthError::Io(e.to_string())
    }
}

/// One steady program phase: per-event mean counts with relative jitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpec {
    /// Mean count per sampling period, one per event.
    pub rates: Vec<f64>,
    /// Relative standard deviation (σ = jitter · rate).
    pub jitter: f64,
    /// Rows this phase occupies.
    pub duration: usize,
}

impl PhaseSpec {
    /// Pre: rates ≥ 0, jitter ≥ 0, duration ≥ 1.
    pub fn new(rates: Vec<f64>, jitter: f64, duration: usize) -> PhaseSpec {
        assert!(rates.iter().all(|&r| r >= 0.0), "rates must be non-negative");
        assert!(jitter >= 0.0, "jitter must be non-negative");
        assert!(duration >= 1, "phase duration must be at least 1");
        PhaseSpec { rates, jitter, duration }
    }
}

/// One counter draw: round(max(0, Normal(rate, jitter·rate))).
fn draw_count(rng: &mut ChaCha8Rng, rate: f64, jitter: f64) -> u64 {
    let normal = Normal::new(rate, jitter * rate).expect("finite rate and jitter");
    let v: f64 = rng.sample(normal);
    v.max(0.0).round() as u64
}

/// Generates a trace by concatenating phases, drawing each count from a
/// seeded truncated Gaussian (row-major, event order within a row).
///
/// Pre: at least one phase; every phase has one rate per event.
pub fn gen_phase_trace(
    phases: &[PhaseSpec],
    events: &[EventId],
    period_ns: u64,
    seed: u64,
) -> HpcTrace {
    assert!(!phases.is_empty(), "at least one phase required");
    assert!(!events.is_empty(), "at least one event required");
    for p in phases {
        assert_eq!(p.rates.len(), events.len(), "one rate per event");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(phases.iter().map(|p| p.duration).sum());
    for phase in phases {
        for _ in 0..phase.duration {
            samples.push(
                phase.rates.iter().map(|&r| draw_count(&mut rng, r, phase.jitter)).collect(),
            );
        }
    }
    HpcTrace {
        sampling_period_ns: period_ns,
        events: events.to_vec(),
        samples,
        label: None,
        mask: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyKind {
    /// Multiply one event's counts, shifting its ratio against the others.
    RatioShift,
    /// Add a fixed multiple of each event's trace-wide σ.
    Spike,
    /// Replace the span with draws from a foreign phase.
    PhaseSwap,
}

impl std::str::FromStr for AnomalyKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ratio_shift" => Ok(AnomalyKind::RatioShift),
            "spike" => Ok(AnomalyKind::Spike),
            "phase_swap" => Ok(AnomalyKind::PhaseSwap),
            other => Err(format!("unknown anomaly kind {other:?}")),
        }
    }
}

impl std::fmt::Display for AnomalyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AnomalyKind::RatioShift => "ratio_shift",
            AnomalyKind::Spike => "spike",
            AnomalyKind::PhaseSwap => "phase_swap",
        })
    }
}

/// An anomaly to plant: what, how strong, and where.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalySpec {
    pub kind: AnomalyKind,
    /// Multiplier (ratio_shift) or σ-units (spike); unused by phase_swap.
    pub magnitude: f64,
    /// (start_row, length) within the trace.
    pub span: (usize, usize),
    /// ratio_shift target; defaults to L3_MISS when absent.
    pub event: Option<EventId>,
    /// phase_swap replacement source; required for that kind.
    pub swap_phase: Option<PhaseSpec>,
}

impl AnomalySpec {
    /// Pre: magnitude > 0, length ≥ 1.
    pub fn new(kind: AnomalyKind, magnitude: f64, span: (usize, usize)) -> AnomalySpec {
        assert!(magnitude > 0.0, "magnitude must be positive");
        assert!(span.1 >= 1, "span length must be at least 1");
        AnomalySpec { kind, magnitude, span, event: None, swap_phase: None }
    }

    pub fn with_event(mut self, event: EventId) -> AnomalySpec {
        self.event = Some(event);
        self
    }

    pub fn with_swap_phase(mut self, phase: PhaseSpec) -> AnomalySpec {
        self.swap_phase = Some(phase);
        self
    }
}

/// Multiplies a count, saturating at the integer range edge.
fn scale_count(c: u64, magnitude: f64) -> u64 {
    (c as f64 * magnitude).round() as u64
}

/// Plants one anomaly into a copy of the trace.
///
/// Returns the modified trace and a mask marking exactly the span rows; the
/// same mask is attached to the returned trace for CSV export. Rows outside
/// the span are bit-identical to the input. A magnitude-1 ratio_shift is the
/// null anomaly: identical samples, mask still set (false-positive floor
/// measurements use it).
pub fn inject_anomaly(
    trace: &HpcTrace,
    spec: &AnomalySpec,
    seed: u64,
) -> Result<(HpcTrace, Vec<bool>), SynthError> {
    let (start, length) = spec.span;
    let rows = trace.n_rows();
    if start.checked_add(length).is_none_or(|end| end > rows) {
        return Err(SynthError::SpanOutOfRange { start, length, rows });
    }
    let mut out = trace.clone();
    match spec.kind {
        AnomalyKind::RatioShift => {
            let event = spec
                .event
                .clone()
                .unwrap_or_else(|| EventId::new("L3_MISS").unwrap());
            let col = trace.event_index(&event).ok_or_else(|| SynthError::UnknownEvent {
                name: event.as_str().to_string(),
            })?;
            for row in &mut out.samples[start..start + length] {
                row[col] = scale_count(row[col], spec.magnitude);
            }
        }
        AnomalyKind::Spike => {
            // per-event σ over the whole input trace
            let sigmas: Vec<f64> = (0..trace.events.len())
                .map(|j| {
                    let col: Vec<f64> =
                        trace.samples.iter().map(|r| r[j] as f64).collect();
                    mean_var(&col).1.sqrt()
                })
                .collect();
            for row in &mut out.samples[start..start + length] {
                for (v, sigma) in row.iter_mut().zip(&sigmas) {
                    *v = v.saturating_add((spec.magnitude * sigma).round() as u64);
                }
            }
        }
        AnomalyKind::PhaseSwap => {
            let phase = spec.swap_phase.as_ref().expect("phase_swap needs a swap phase");
            assert_eq!(phase.rates.len(), trace.events.len(), "one rate per event");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for row in &mut out.samples[start..start + length] {
                for (v, &rate) in row.iter_mut().zip(&phase.rates) {
                    *v = draw_count(&mut rng, rate, phase.jitter);
                }
            }
        }
    }
    let mut mask = vec![false; rows];
    mask[start..start + length].fill(true);
    out.mask = Some(mask.clone());
    Ok((out, mask))
}

/// First-order Markov chain over a subset of the decoder vocabulary,
/// defining one sequence family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub name: String,
    /// State set; every entry must be a decoder vocabulary token.
    pub tokens: Vec<String>,
    /// Unnormalized transition weights, row per current token.
    pub transitions: Vec<Vec<f64>>,
    /// Unnormalized initial-token weights.
    pub initial: Vec<f64>,
}

impl FamilySpec {
    /// Pre: tokens non-empty and in-vocabulary, transitions square with
    /// positive row sums, initial weights match and sum positive.
    pub fn new(
        name: impl Into<String>,
        tokens: Vec<String>,
        transitions: Vec<Vec<f64>>,
        initial: Vec<f64>,
    ) -> FamilySpec {
        assert!(!tokens.is_empty(), "family needs at least one token");
        for t in &tokens {
            assert!(decode::is_vocab_token(t), "token {t:?} is not in the vocabulary");
        }
        assert_eq!(transitions.len(), tokens.len(), "square transition table");
        for row in &transitions {
            assert_eq!(row.len(), tokens.len(), "square transition table");
            assert!(row.iter().all(|&w| w >= 0.0), "non-negative weights");
            assert!(row.iter().sum::<f64>() > 0.0, "positive row sum");
        }
        assert_eq!(initial.len(), tokens.len(), "one initial weight per token");
        assert!(initial.iter().sum::<f64>() > 0.0, "positive initial sum");
        FamilySpec { name: name.into(), tokens, transitions, initial }
    }

    /// A family with seeded random positive weights over the given tokens.
    pub fn seeded(name: impl Into<String>, tokens: Vec<String>, seed: u64) -> FamilySpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = tokens.len();
        let transitions =
            (0..n).map(|_| (0..n).map(|_| rng.random_range(0.05..1.0)).collect()).collect();
        let initial = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        FamilySpec::new(name, tokens, transitions, initial)
    }
}

/// Builds one seeded family per name over disjoint slices of the real
/// mnemonic vocabulary (fallback tokens excluded), so that families share no
/// unigrams or bigrams at all.
pub fn disjoint_family_specs(names: &[&str], tokens_each: usize, seed: u64) -> Vec<FamilySpec> {
    assert!(names.len() >= 2, "at least two families required");
    assert!(tokens_each >= 1, "each family needs at least one token");
    let pool: Vec<&str> = decode::vocabulary()
        .iter()
        .copied()
        .filter(|t| {
            *t != decode::TOKEN_UNK16 && *t != decode::TOKEN_UNK32 && *t != decode::TOKEN_PAD8
        })
        .collect();
    assert!(
        names.len() * tokens_each <= pool.len(),
        "vocabulary too small for {} disjoint families of {tokens_each}",
        names.len()
    );
    names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let tokens = pool[i * tokens_each..(i + 1) * tokens_each]
                .iter()
                .map(|t| t.to_string())
                .collect();
            FamilySpec::seeded(*name, tokens, seed.wrapping_add(i as u64))
        })
        .collect()
}

/// Samples a balanced labeled corpus: sequence i belongs to family
/// `i mod families`, with a seeded length from `length_range` (inclusive)
/// and tokens walked along the family's Markov chain.
///
/// Pre: ≥2 families, count ≥ 1, 1 ≤ lo ≤ hi.
pub fn gen_opcode_corpus(
    families: &[FamilySpec],
    count: usize,
    length_range: (usize, usize),
    seed: u64,
) -> Vec<(OpcodeSequence, usize)> {
    assert!(families.len() >= 2, "at least two families required");
    assert!(count >= 1, "empty corpus requested");
    let (lo, hi) = length_range;
    assert!(1 <= lo && lo <= hi, "bad length range {lo}..={hi}");

    let initial_dists: Vec<WeightedIndex<f64>> = families
        .iter()
        .map(|f| WeightedIndex::new(f.initial.iter().copied()).expect("positive weights"))
        .collect();
    let transition_dists: Vec<Vec<WeightedIndex<f64>>> = families
        .iter()
        .map(|f| {
            f.transitions
                .iter()
                .map(|row| WeightedIndex::new(row.iter().copied()).expect("positive weights"))
                .collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = Vec::with_capacity(count);
    for i in 0..count {
        let class = i % families.len();
        let family = &families[class];
        let length = rng.random_range(lo..=hi);
        let mut state = rng.sample(&initial_dists[class]);
        let mut tokens = Vec::with_capacity(length);
        tokens.push(family.tokens[state].clone());
        for _ in 1..length {
            state = rng.sample(&transition_dists[class][state]);
            tokens.push(family.tokens[state].clone());
        }
        let source_id = format!("{}_{i:04}", family.name);
        corpus.push((OpcodeSequence::new(tokens, source_id), class));
    }
    corpus
}

/// Writes a corpus directory: one token-per-line `<source_id>.txt` per
/// sequence plus a `labels.csv` of `file,label` rows naming each class.
pub fn write_corpus_dir(
    dir: &Path,
    corpus: &[(OpcodeSequence, usize)],
    class_names: &[String],
) -> Result<(), SynthError> {
    fs::create_dir_all(dir)?;
    let mut labels = String::from("file,label\n");
    for (seq, class) in corpus {
        let file_name = format!("{}.txt", seq.source_id);
        let mut f = fs::File::create(dir.join(&file_name))?;
        seq.write_tokens(&mut f)?;
        labels.push_str(&file_name);
        labels.push(',');
        labels.push_str(&class_names[*class]);
        labels.push('\n');
    }
    let mut f = fs::File::create(dir.join("labels.csv"))?;
    f.write_all(labels.as_bytes())?;
    Ok(())
}

/// A labeled corpus: `(sequence, class)` pairs plus the class-name table.
pub type LabeledCorpus = (Vec<(OpcodeSequence, usize)>, Vec<String>);

/// Reads a corpus directory back. Class indices follow first appearance in
/// `labels.csv`, so a freshly written corpus round-trips with its original
/// numbering.
pub fn read_corpus_dir(dir: &Path) -> Result<LabeledCorpus, SynthError> {
    let labels_path = dir.join("labels.csv");
    let path_str = labels_path.display().to_string();
    let reader = BufReader::new(fs::File::open(&labels_path)?);
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines.next().ok_or_else(|| SynthError::Parse {
        path: path_str.clone(),
        line: 1,
        msg: "empty labels file".into(),
    })?;
    if header?.trim() != "file,label" {
        return Err(SynthError::Parse {
            path: path_str,
            line: 1,
            msg: "expected header \"file,label\"".into(),
        });
    }

    let mut class_names: Vec<String> = Vec::new();
    let mut name_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut corpus = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (file_name, label) = line.split_once(',').ok_or_else(|| SynthError::Parse {
            path: path_str.clone(),
            line: i + 1,
            msg: "expected \"file,label\"".into(),
        })?;
        let class = *name_index.entry(label.trim().to_string()).or_insert_with(|| {
            class_names.push(label.trim().to_string());
            class_names.len() - 1
        });
        let file_path = dir.join(file_name.trim());
        let source_id = file_name.trim().trim_end_matches(".txt").to_string();
        let f = fs::File::open(&file_path)?;
        let seq = OpcodeSequence::read_tokens(BufReader::new(f), source_id).map_err(|e| {
            SynthError::Parse {
                path: file_path.display().to_string(),
                line: 0,
                msg: e.to_string(),
            }
        })?;
        corpus.push((seq, class));
    }
    Ok((corpus, class_names))
}
