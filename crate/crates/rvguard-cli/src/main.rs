//! `rvguard`: command-line front end over the rvguard library.
//!
//! Every subcommand is a thin shell around one or two library operations:
//! it parses flags, opens files, calls the library, and writes one of the
//! documented formats. Exit codes: 0 on success, 2 on input errors (missing
//! or malformed files, bad flags, mismatched data), 3 on contract
//! violations (training diverged, empty ensemble, non-finite parameters).

mod eval_cmd;
mod static_cmd;
mod synth_cmd;
mod trace_cmd;

use clap::{Parser, Subcommand, ValueEnum};
use rvguard::detect::{BaseLearner, DetectError};
use rvguard::model::ModelError;
use rvguard::ngram::{Norm, Selection};
use rvguard::persist::PersistError;
use rvguard::trace::EpsilonPolicy;
use std::fs;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "rvguard",
    version,
    about = "RISC-V binary and performance-counter detection toolkit",
    after_help = "Exit codes: 0 success, 2 input error, 3 contract violation."
)]
struct Cli {
    /// Seed for every stochastic step (generation, resampling, training)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Primary output path; stdout when omitted (required for models and
    /// directories)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StaticKind {
    /// Multinomial naive Bayes
    Nb,
    /// Multilayer perceptron
    Mlp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodKind {
    /// Between-class over within-class variance per feature
    Fisher,
    /// Absolute Pearson correlation against the labels
    Pearson,
    /// Binned mutual information with the labels
    Mi,
    /// Principal component projection (budget = components)
    Pca,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DetectorKind {
    /// Diagonal Gaussian one-class detector
    Gauss,
    /// k-nearest-neighbor one-class detector
    Knn,
    /// Boosted decision stumps (needs labels)
    Adaboost,
    /// Bagged decision stumps (needs labels)
    Bagging,
    /// One-class gate plus anomaly-class ensemble
    TwoStage,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Stage1Kind {
    Gauss,
    Knn,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Stage2Kind {
    Adaboost,
    Bagging,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize an ELF image: machine, entry point, sections
    InspectElf {
        /// ELF file to inspect
        elf: PathBuf,
        /// Reject files whose machine type is not RISC-V
        #[arg(long)]
        strict: bool,
    },

    /// Decode executable sections into one mnemonic token per line
    Decode {
        /// RISC-V ELF file to decode
        elf: PathBuf,
    },

    /// Build an n-gram vocabulary and labeled feature matrix from a corpus
    /// directory (token files plus labels.csv)
    Features {
        /// Corpus directory
        corpus: PathBuf,
        /// Gram length
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Keep at most this many grams
        #[arg(long, default_value_t = 256)]
        max_size: usize,
        /// Drop grams seen in fewer documents than this
        #[arg(long, default_value_t = 1)]
        min_doc_freq: usize,
        /// Gram ranking: frequency or info_gain
        #[arg(long, default_value = "frequency")]
        selection: Selection,
        /// Feature normalization: raw, relfreq, or tfidf
        #[arg(long, default_value = "tfidf")]
        norm: Norm,
        /// Where to write the vocabulary file
        #[arg(long)]
        vocab_out: PathBuf,
    },

    /// Train a static classifier on a labeled feature matrix
    TrainStatic {
        /// Classifier family
        kind: StaticKind,
        /// Feature matrix CSV from `features`
        #[arg(long)]
        data: PathBuf,
        /// Vocabulary file the matrix was built with
        #[arg(long)]
        vocab: PathBuf,
        /// Normalization the matrix was built with
        #[arg(long, default_value = "tfidf")]
        norm: Norm,
        /// Naive Bayes smoothing
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// MLP hidden layer widths, comma separated
        #[arg(long, default_value = "32")]
        hidden: String,
        #[arg(long, default_value_t = 0.1)]
        learning_rate: f64,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 16)]
        batch_size: usize,
        /// L2 weight penalty
        #[arg(long, default_value_t = 0.0)]
        l2: f64,
    },

    /// Continue training a saved MLP on new data with early layers frozen
    FineTune {
        /// Base model file (must be an MLP)
        #[arg(long)]
        base: PathBuf,
        /// Feature matrix CSV to tune on
        #[arg(long)]
        data: PathBuf,
        /// Vocabulary file the matrix was built with
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long, default_value = "tfidf")]
        norm: Norm,
        /// Layers to freeze from the input side; default freezes all but
        /// the output layer
        #[arg(long)]
        frozen_layers: Option<usize>,
        #[arg(long, default_value_t = 0.1)]
        learning_rate: f64,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        #[arg(long, default_value_t = 16)]
        batch_size: usize,
        #[arg(long, default_value_t = 0.0)]
        l2: f64,
    },

    /// Predict classes for a feature matrix with a saved static model
    Classify {
        /// Model file from `train-static` or `fine-tune`
        #[arg(long)]
        model: PathBuf,
        /// Feature matrix CSV
        #[arg(long)]
        data: PathBuf,
        /// Vocabulary file the matrix was built with
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long, default_value = "tfidf")]
        norm: Norm,
    },

    /// Summarize a counter trace: rows, period, per-event statistics
    TraceInfo {
        /// Trace CSV
        trace: PathBuf,
    },

    /// Slice a trace into overlapping windows of summary statistics
    Windowize {
        /// Trace CSV
        trace: PathBuf,
        #[arg(long, default_value_t = 100)]
        window_len: usize,
        #[arg(long, default_value_t = 50)]
        stride: usize,
        /// Per-window statistics, comma separated (mean,std,min,max,slope)
        #[arg(long, default_value = "mean,std")]
        stats: String,
        /// Events to include, comma separated (all when omitted)
        #[arg(long)]
        events: Option<String>,
        /// Derived ratio column NUM/DEN (repeatable), e.g. L3_MISS/L1D_MISS
        #[arg(long)]
        ratio: Vec<String>,
        /// Zero-denominator policy for ratios: zero or epsilon
        #[arg(long, default_value = "zero")]
        ratio_policy: EpsilonPolicy,
    },

    /// Score and rank features, or fit a PCA projection
    SelectFeatures {
        /// Scoring method
        method: MethodKind,
        /// Windowed feature CSV (labels required except for pca)
        #[arg(long)]
        features: PathBuf,
        /// Features to keep (components for pca)
        #[arg(long, default_value_t = 4)]
        budget: usize,
        /// Histogram bins for mutual information
        #[arg(long, default_value_t = 10)]
        bins: usize,
        /// Also write the feature CSV reduced to the selected columns
        #[arg(long)]
        reduced: Option<PathBuf>,
        /// With pca: also write the projected features here
        #[arg(long)]
        transformed: Option<PathBuf>,
    },

    /// Train an anomaly detector on windowed features
    TrainDetector {
        /// Detector family
        kind: DetectorKind,
        /// Windowed feature CSV; one-class detectors train on its normal
        /// rows (all rows when unlabeled), ensembles need labels
        #[arg(long)]
        features: PathBuf,
        /// Training-score percentile for one-class thresholds
        #[arg(long, default_value_t = 95.0)]
        percentile: f64,
        /// Neighbors for knn
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Boosting rounds for adaboost
        #[arg(long, default_value_t = 10)]
        rounds: usize,
        /// Bootstrap bags for bagging
        #[arg(long, default_value_t = 25)]
        bags: usize,
        /// Bagging base learner
        #[arg(long, default_value = "stump")]
        base: BaseLearner,
        /// two-stage gate
        #[arg(long, default_value = "gauss")]
        stage1: Stage1Kind,
        /// two-stage anomaly classifier
        #[arg(long, default_value = "adaboost")]
        stage2: Stage2Kind,
        /// Verdict name for the anomalous class
        #[arg(long, default_value = "anomalous")]
        anomaly_class: String,
    },

    /// Run a saved detector over windowed features
    Detect {
        /// Detector model file
        #[arg(long)]
        model: PathBuf,
        /// Windowed feature CSV
        #[arg(long)]
        features: PathBuf,
    },

    /// Generate a phase-structured synthetic trace, optionally with
    /// injected anomalies
    SynthTrace {
        /// Phase spec `rates=R0:R1:..,dur=N[,jitter=J]` (repeatable, one
        /// rate per event)
        #[arg(long, required = true)]
        phase: Vec<String>,
        /// Events, comma separated; the standard five when omitted
        #[arg(long)]
        events: Option<String>,
        #[arg(long, default_value_t = 1_000_000)]
        period_ns: u64,
        /// Anomaly spec `kind=K,start=S,len=L[,mag=M][,event=E]
        /// [,swap-rates=..][,swap-jitter=J]` (repeatable)
        #[arg(long)]
        anomaly: Vec<String>,
    },

    /// Generate a labeled synthetic opcode corpus directory
    SynthCorpus {
        /// Family names, comma separated (also the class labels)
        #[arg(long, default_value = "benign,malicious")]
        families: String,
        /// Mnemonics in each family's pool
        #[arg(long, default_value_t = 12)]
        tokens_per_family: usize,
        /// Total sequences, assigned round-robin to families
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 100)]
        min_len: usize,
        #[arg(long, default_value_t = 300)]
        max_len: usize,
        /// Give every family the same chain (indistinguishable-class null
        /// corpus)
        #[arg(long)]
        identical: bool,
    },

    /// Compute metrics from prediction and truth columns
    Eval {
        /// CSV holding the prediction column
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, default_value = "prediction")]
        prediction_column: String,
        /// CSV holding the truth column (defaults to the predictions file)
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, default_value = "truth")]
        truth_column: String,
        /// Column in the predictions file to use as ranking scores
        #[arg(long)]
        scores_column: Option<String>,
        /// Class treated as positive
        #[arg(long)]
        positive: String,
        /// Map detection outputs onto two classes: verdicts other than
        /// "normal" count as "anomalous", truth 0/1 as normal/anomalous
        #[arg(long)]
        binarize_detection: bool,
    },
}

/// A failed run: what went wrong and which exit code it maps to.
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub fn input_error(error: anyhow::Error) -> Failure {
    Failure { code: 2, error }
}

pub fn contract_error(error: anyhow::Error) -> Failure {
    Failure { code: 3, error }
}

/// Context-adding conversions into [`Failure`].
pub trait OrFail<T> {
    fn or_input(self, what: &str) -> Result<T, Failure>;
    fn or_contract(self, what: &str) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> OrFail<T> for Result<T, E> {
    fn or_input(self, what: &str) -> Result<T, Failure> {
        self.map_err(|e| input_error(e.into().context(what.to_string())))
    }

    fn or_contract(self, what: &str) -> Result<T, Failure> {
        self.map_err(|e| contract_error(e.into().context(what.to_string())))
    }
}

/// Training failures: divergence is a contract violation, the rest are
/// input problems.
pub fn model_failure(e: ModelError, what: &str) -> Failure {
    let code = match e {
        ModelError::NonFiniteLoss { .. } => 3,
        _ => 2,
    };
    Failure { code, error: anyhow::Error::new(e).context(what.to_string()) }
}

/// Detector failures: an empty ensemble at prediction time is a contract
/// violation, the rest are input problems.
pub fn detect_failure(e: DetectError, what: &str) -> Failure {
    let code = match e {
        DetectError::EmptyEnsemble => 3,
        _ => 2,
    };
    Failure { code, error: anyhow::Error::new(e).context(what.to_string()) }
}

/// Persistence failures: non-finite parameters are a contract violation,
/// the rest are input problems.
pub fn persist_failure(e: PersistError, what: &str) -> Failure {
    let code = match e {
        PersistError::NonFinite { .. } => 3,
        _ => 2,
    };
    Failure { code, error: anyhow::Error::new(e).context(what.to_string()) }
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).or_input(&format!("reading {}", path.display()))
}

pub fn open_reader(path: &Path) -> Result<BufReader<fs::File>, Failure> {
    Ok(BufReader::new(
        fs::File::open(path).or_input(&format!("opening {}", path.display()))?,
    ))
}

/// The primary output sink: `--out` as a file, stdout otherwise.
pub fn out_writer(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    match out {
        Some(path) => {
            let f = fs::File::create(path)
                .or_input(&format!("creating {}", path.display()))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

pub fn create_writer(path: &Path) -> Result<BufWriter<fs::File>, Failure> {
    Ok(BufWriter::new(
        fs::File::create(path).or_input(&format!("creating {}", path.display()))?,
    ))
}

/// `--out` where the command writes a file artifact and stdout makes no
/// sense.
pub fn require_out<'a>(out: &'a Option<PathBuf>, what: &str) -> Result<&'a Path, Failure> {
    out.as_deref()
        .ok_or_else(|| input_error(anyhow::anyhow!("{what} requires --out")))
}

/// 17-significant-digit float form used in all CSV output.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Splits a comma-separated list and parses each piece.
pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, Failure>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<T>()
                .map_err(|e| input_error(anyhow::anyhow!("bad {what} {p:?}: {e}")))
        })
        .collect()
}

/// A small in-memory CSV with named columns, for `eval` inputs.
pub struct CsvTable {
    pub path: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn load(path: &Path) -> Result<CsvTable, Failure> {
        let display = path.display().to_string();
        let mut text = String::new();
        open_reader(path)?
            .read_to_string(&mut text)
            .or_input(&format!("reading {display}"))?;
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| input_error(anyhow::anyhow!("{display}: empty file")))?;
        let header: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
            if fields.len() != header.len() {
                return Err(input_error(anyhow::anyhow!(
                    "{display}:{}: expected {} fields, found {}",
                    i + 1,
                    header.len(),
                    fields.len()
                )));
            }
            rows.push(fields);
        }
        Ok(CsvTable { path: display, header, rows })
    }

    pub fn column(&self, name: &str) -> Result<Vec<String>, Failure> {
        let idx = self.header.iter().position(|h| h == name).ok_or_else(|| {
            input_error(anyhow::anyhow!(
                "{}: no column {name:?} (have: {})",
                self.path,
                self.header.join(", ")
            ))
        })?;
        Ok(self.rows.iter().map(|r| r[idx].clone()).collect())
    }

    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>, Failure> {
        self.column(name)?
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.parse::<f64>().map_err(|e| {
                    input_error(anyhow::anyhow!(
                        "{}:{}: bad number {v:?} in column {name:?}: {e}",
                        self.path,
                        i + 2
                    ))
                })
            })
            .collect()
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let seed = cli.seed;
    let out = cli.out;
    match cli.command {
        Command::InspectElf { elf, strict } => static_cmd::inspect_elf(&out, &elf, strict),
        Command::Decode { elf } => static_cmd::decode(&out, &elf),
        Command::Features { corpus, n, max_size, min_doc_freq, selection, norm, vocab_out } => {
            static_cmd::features(&out, &corpus, n, max_size, min_doc_freq, selection, norm, &vocab_out)
        }
        Command::TrainStatic {
            kind,
            data,
            vocab,
            norm,
            alpha,
            hidden,
            learning_rate,
            epochs,
            batch_size,
            l2,
        } => static_cmd::train_static(
            &out,
            kind,
            &data,
            &vocab,
            norm,
            alpha,
            &hidden,
            learning_rate,
            epochs,
            batch_size,
            l2,
            seed,
        ),
        Command::FineTune {
            base,
            data,
            vocab,
            norm,
            frozen_layers,
            learning_rate,
            epochs,
            batch_size,
            l2,
        } => static_cmd::fine_tune(
            &out,
            &base,
            &data,
            &vocab,
            norm,
            frozen_layers,
            learning_rate,
            epochs,
            batch_size,
            l2,
            seed,
        ),
        Command::Classify { model, data, vocab, norm } => {
            static_cmd::classify(&out, &model, &data, &vocab, norm)
        }
        Command::TraceInfo { trace } => trace_cmd::trace_info(&out, &trace),
        Command::Windowize { trace, window_len, stride, stats, events, ratio, ratio_policy } => {
            trace_cmd::windowize(&out, &trace, window_len, stride, &stats, events.as_deref(), &ratio, ratio_policy)
        }
        Command::SelectFeatures { method, features, budget, bins, reduced, transformed } => {
            trace_cmd::select_features(
                &out,
                method,
                &features,
                budget,
                bins,
                reduced.as_deref(),
                transformed.as_deref(),
            )
        }
        Command::TrainDetector {
            kind,
            features,
            percentile,
            k,
            rounds,
            bags,
            base,
            stage1,
            stage2,
            anomaly_class,
        } => trace_cmd::train_detector(
            &out,
            kind,
            &features,
            percentile,
            k,
            rounds,
            bags,
            base,
            stage1,
            stage2,
            &anomaly_class,
            seed,
        ),
        Command::Detect { model, features } => trace_cmd::detect(&out, &model, &features),
        Command::SynthTrace { phase, events, period_ns, anomaly } => {
            synth_cmd::synth_trace(&out, &phase, events.as_deref(), period_ns, &anomaly, seed)
        }
        Command::SynthCorpus {
            families,
            tokens_per_family,
            count,
            min_len,
            max_len,
            identical,
        } => synth_cmd::synth_corpus(
            &out,
            &families,
            tokens_per_family,
            count,
            min_len,
            max_len,
            identical,
            seed,
        ),
        Command::Eval {
            predictions,
            prediction_column,
            truth,
            truth_column,
            scores_column,
            positive,
            binarize_detection,
        } => eval_cmd::eval(
            &out,
            &predictions,
            &prediction_column,
            truth.as_deref(),
            &truth_column,
            scores_column.as_deref(),
            &positive,
            binarize_detection,
        ),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
