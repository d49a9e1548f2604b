//! Opcode n-gram features: counting, vocabulary learning, and vectorization.
//!
//! A decoded binary becomes a bag of n-grams (contiguous mnemonic windows),
//! the training corpus elects a vocabulary (by raw frequency or by
//! information gain against labels), and each sequence is then projected
//! onto that vocabulary as a fixed-width numeric vector. The vocabulary
//! freezes everything inference needs, including idf weights, so feature
//! extraction never peeks at inference-set statistics.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use crate::linalg::Matrix;
use crate::select::mutual_information;
use crate::util::{fmt_f64, fnv1a_hex};

/// Bins used when ranking candidate grams by mutual information.
const INFO_GAIN_BINS: usize = 10;

/// A gram is an ordered run of mnemonic tokens. Files encode it with `|`
/// separators (`tok1|tok2`), which no mnemonic contains.
pub type Gram = Vec<String>;

pub fn gram_to_string(gram: &[String]) -> String {
    gram.join("|")
}

pub fn gram_from_str(s: &str) -> Gram {
    s.split('|').map(str::to_owned).collect()
}

#[derive(Debug, thiserror::Error)]
pub enum NgramError {
    /// Gram length zero is meaningless.
    #[error("n-gram length must be at least 1")]
    InvalidN,
    /// Filters removed every candidate gram.
    #[error("no gram survived the vocabulary filters")]
    EmptyVocabulary,
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

/// How a vocabulary ranked its candidate grams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    Frequency,
    InfoGain,
}

impl std::fmt::Display for Selection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Selection::Frequency => "frequency",
            Selection::InfoGain => "info_gain",
        })
    }
}

impl std::str::FromStr for Selection {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "frequency" => Ok(Selection::Frequency),
            "info_gain" => Ok(Selection::InfoGain),
            other => Err(format!("unknown selection method {other:?}")),
        }
    }
}

/// Normalization applied when projecting counts onto the vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    /// Plain gram counts.
    Raw,
    /// Counts divided by the sequence's total gram count.
    RelFreq,
    /// Relative frequency scaled by the idf weights frozen at build time.
    TfIdf,
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Norm::Raw => "raw",
            Norm::RelFreq => "relfreq",
            Norm::TfIdf => "tfidf",
        })
    }
}

impl std::str::FromStr for Norm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "raw" => Ok(Norm::Raw),
            "relfreq" => Ok(Norm::RelFreq),
            "tfidf" => Ok(Norm::TfIdf),
            other => Err(format!("unknown normalization {other:?}")),
        }
    }
}

/// Counts every length-`n` window of `tokens` (stride 1).
///
/// Total mass is always `max(0, tokens.len() − n + 1)`; sequences shorter
/// than `n` produce an empty map.
pub fn extract_ngrams(tokens: &[String], n: usize) -> Result<BTreeMap<Gram, u64>, NgramError> {
    if n == 0 {
        return Err(NgramError::InvalidN);
    }
    let mut counts: BTreeMap<Gram, u64> = BTreeMap::new();
    for window in tokens.windows(n) {
        *counts.entry(window.to_vec()).or_insert(0) += 1;
    }
    Ok(counts)
}

/// One vocabulary column: the gram and its frozen idf weight.
#[derive(Debug, Clone, PartialEq)]
struct VocabEntry {
    gram: Gram,
    idf: f64,
}

/// A learned n-gram vocabulary: the feature schema for one experiment.
///
/// Column order is the selection ranking (column 0 is the highest-ranked
/// gram). The `id` fingerprints n, selection method, gram order, and idf
/// weights; feature vectors and trained models carry it so mismatched
/// schemas are detectable.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramVocab {
    n: usize,
    selection: Selection,
    entries: Vec<VocabEntry>,
    index: BTreeMap<Gram, usize>,
    id: String,
}

impl NgramVocab {
    fn assemble(n: usize, selection: Selection, entries: Vec<VocabEntry>) -> Self {
        let index =
            entries.iter().enumerate().map(|(i, e)| (e.gram.clone(), i)).collect();
        let mut parts: Vec<String> = vec!["ngram".into(), n.to_string(), selection.to_string()];
        for e in &entries {
            parts.push(gram_to_string(&e.gram));
            parts.push(fmt_f64(e.idf));
        }
        let id = fnv1a_hex(parts.iter().map(String::as_str));
        NgramVocab { n, selection, entries, index, id }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn selection(&self) -> Selection {
        self.selection
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Schema fingerprint shared by vectors and models built from this vocabulary.
    pub fn id(&self) -> &str {
        &self.id
    }

    /// Column index of a gram, if present.
    pub fn index_of(&self, gram: &[String]) -> Option<usize> {
        self.index.get(gram).copied()
    }

    /// Grams in column order.
    pub fn grams(&self) -> impl Iterator<Item = &Gram> {
        self.entries.iter().map(|e| &e.gram)
    }

    /// Frozen idf weight of a column.
    pub fn idf(&self, col: usize) -> f64 {
        self.entries[col].idf
    }

    /// Writes the line-oriented vocabulary file: a `# n=.. selection=..`
    /// header, then one `index<TAB>gram<TAB>idf` line per column.
    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# n={} selection={}", self.n, self.selection)?;
        for (i, e) in self.entries.iter().enumerate() {
            writeln!(w, "{i}\t{}\t{}", gram_to_string(&e.gram), fmt_f64(e.idf))?;
        }
        Ok(())
    }

    /// Parses a vocabulary file written by [`NgramVocab::write`].
    ///
    /// `path` is used only for error context.
    pub fn read<R: BufRead>(r: R, path: &str) -> Result<Self, NgramError> {
        let parse = |line: usize, msg: String| NgramError::Parse {
            path: path.to_owned(),
            line,
            msg,
        };
        let mut lines = r.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| parse(1, "empty vocabulary file".into()))?;
        let header = header?;
        let rest = header
            .strip_prefix("# n=")
            .ok_or_else(|| parse(1, "expected `# n=<n> selection=<method>` header".into()))?;
        let (n_str, sel_str) = rest
            .split_once(" selection=")
            .ok_or_else(|| parse(1, "expected `selection=` in header".into()))?;
        let n: usize = n_str.parse().map_err(|_| parse(1, format!("bad n {n_str:?}")))?;
        if n == 0 {
            return Err(NgramError::InvalidN);
        }
        let selection: Selection = sel_str.parse().map_err(|e| parse(1, e))?;

        let mut entries = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let (Some(index), Some(gram), Some(idf), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(parse(lineno, "expected index<TAB>gram<TAB>idf".into()));
            };
            let index: usize =
                index.parse().map_err(|_| parse(lineno, format!("bad index {index:?}")))?;
            if index != entries.len() {
                return Err(parse(lineno, format!("index {index} out of order")));
            }
            let gram = gram_from_str(gram);
            if gram.len() != n {
                return Err(parse(lineno, format!("gram arity {} != n={n}", gram.len())));
            }
            let idf: f64 =
                idf.parse().map_err(|_| parse(lineno, format!("bad idf {idf:?}")))?;
            entries.push(VocabEntry { gram, idf });
        }
        if entries.is_empty() {
            return Err(NgramError::EmptyVocabulary);
        }
        Ok(NgramVocab::assemble(n, selection, entries))
    }
}

/// Learns a vocabulary from a labeled corpus of gram-count maps.
///
/// Grams seen in fewer than `min_doc_freq` documents are dropped. Survivors
/// are ranked by total corpus frequency or by mutual information against the
/// labels, ties broken by gram order, and the top `max_size` become columns
/// (column order = rank order). Idf weights `ln((1+D)/(1+df)) + 1` are
/// computed here, from the training corpus, and frozen.
///
/// Pre: corpus non-empty, every gram has arity `n`.
pub fn build_vocab(
    corpus: &[(BTreeMap<Gram, u64>, usize)],
    n: usize,
    max_size: usize,
    min_doc_freq: usize,
    selection: Selection,
) -> Result<NgramVocab, NgramError> {
    if n == 0 {
        return Err(NgramError::InvalidN);
    }
    assert!(!corpus.is_empty(), "vocabulary needs a training corpus");

    let mut doc_freq: BTreeMap<&Gram, usize> = BTreeMap::new();
    let mut total_freq: BTreeMap<&Gram, u64> = BTreeMap::new();
    for (counts, _) in corpus {
        for (gram, &count) in counts {
            debug_assert_eq!(gram.len(), n, "gram arity must match n");
            *doc_freq.entry(gram).or_insert(0) += 1;
            *total_freq.entry(gram).or_insert(0) += count;
        }
    }
    // BTreeMap iteration makes this candidate list lexicographic, which is
    // the tie-break order for both ranking modes.
    let candidates: Vec<&Gram> = doc_freq
        .iter()
        .filter(|(_, &df)| df >= min_doc_freq)
        .map(|(&gram, _)| gram)
        .collect();
    if candidates.is_empty() || max_size == 0 {
        return Err(NgramError::EmptyVocabulary);
    }

    let order: Vec<usize> = match selection {
        Selection::Frequency => {
            let mut order: Vec<usize> = (0..candidates.len()).collect();
            order.sort_by(|&a, &b| {
                total_freq[candidates[b]].cmp(&total_freq[candidates[a]]).then(a.cmp(&b))
            });
            order
        }
        Selection::InfoGain => {
            let mut counts = Matrix::zeros(corpus.len(), candidates.len());
            for (row, (doc, _)) in corpus.iter().enumerate() {
                for (col, gram) in candidates.iter().enumerate() {
                    counts.set(row, col, doc.get(*gram).copied().unwrap_or(0) as f64);
                }
            }
            let labels: Vec<usize> = corpus.iter().map(|(_, y)| *y).collect();
            mutual_information(&counts, &labels, INFO_GAIN_BINS).ranking
        }
    };

    let docs = corpus.len() as f64;
    let entries: Vec<VocabEntry> = order
        .into_iter()
        .take(max_size)
        .map(|i| {
            let gram = candidates[i].clone();
            let idf = ((1.0 + docs) / (1.0 + doc_freq[&gram] as f64)).ln() + 1.0;
            VocabEntry { gram, idf }
        })
        .collect();
    Ok(NgramVocab::assemble(n, selection, entries))
}

/// A sequence projected onto a vocabulary.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    /// Fingerprint of the vocabulary the values are indexed by.
    pub vocab_id: String,
    pub norm: Norm,
}

/// Projects a token sequence onto `vocab` columns under `norm`.
///
/// Out-of-vocabulary grams are dropped, so a relfreq vector sums to at most
/// 1 (exactly 1 when everything was in-vocab). Sequences shorter than n
/// yield the zero vector.
pub fn vectorize(tokens: &[String], vocab: &NgramVocab, norm: Norm) -> FeatureVector {
    assert!(!vocab.is_empty(), "cannot vectorize against an empty vocabulary");
    let counts = extract_ngrams(tokens, vocab.n()).expect("vocab guarantees n >= 1");
    let total: u64 = counts.values().sum();
    let mut values = vec![0.0; vocab.len()];
    for (gram, &count) in &counts {
        let Some(col) = vocab.index_of(gram) else { continue };
        values[col] = match norm {
            Norm::Raw => count as f64,
            Norm::RelFreq => count as f64 / total as f64,
            Norm::TfIdf => count as f64 / total as f64 * vocab.idf(col),
        };
    }
    FeatureVector { values, vocab_id: vocab.id().to_owned(), norm }
}

/// Feature vectors with class labels, ready for training.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub rows: Vec<FeatureVector>,
    pub labels: Vec<usize>,
    /// Display name per class id; defaults to the stringified id.
    pub class_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(class_names: Vec<String>) -> Self {
        LabeledDataset { rows: Vec::new(), labels: Vec::new(), class_names }
    }

    /// Appends a sample, enforcing that every row shares one schema.
    pub fn push(&mut self, row: FeatureVector, label: usize) {
        if let Some(first) = self.rows.first() {
            assert_eq!(first.vocab_id, row.vocab_id, "rows must share a vocabulary");
            assert_eq!(first.norm, row.norm, "rows must share a normalization");
        }
        self.rows.push(row);
        self.labels.push(label);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Values as a samples × features matrix (labels returned alongside).
    pub fn to_matrix(&self) -> (Matrix, Vec<usize>) {
        let rows: Vec<Vec<f64>> = self.rows.iter().map(|r| r.values.clone()).collect();
        (Matrix::from_rows(&rows), self.labels.clone())
    }

    /// Writes the feature matrix as CSV: header `label,<gram_1>,...` with
    /// grams in vocabulary column order, one row per sample, values with 17
    /// significant digits.
    pub fn write_csv<W: Write>(&self, vocab: &NgramVocab, mut w: W) -> io::Result<()> {
        let mut header = String::from("label");
        for gram in vocab.grams() {
            write!(header, ",{}", gram_to_string(gram)).unwrap();
        }
        writeln!(w, "{header}")?;
        for (row, &label) in self.rows.iter().zip(&self.labels) {
            let mut line = label.to_string();
            for v in &row.values {
                write!(line, ",{}", fmt_f64(*v)).unwrap();
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Reads a feature matrix CSV back against a known vocabulary and norm.
    ///
    /// The header's gram order must match the vocabulary exactly; `path` is
    /// used only for error context.
    pub fn read_csv<R: BufRead>(
        r: R,
        vocab: &NgramVocab,
        norm: Norm,
        path: &str,
    ) -> Result<Self, NgramError> {
        let parse = |line: usize, msg: String| NgramError::Parse {
            path: path.to_owned(),
            line,
            msg,
        };
        let mut lines = r.lines().enumerate();
        let (_, header) =
            lines.next().ok_or_else(|| parse(1, "empty feature matrix".into()))?;
        let header = header?;
        let mut fields = header.split(',');
        if fields.next() != Some("label") {
            return Err(parse(1, "header must start with `label`".into()));
        }
        let grams: Vec<Gram> = fields.map(gram_from_str).collect();
        let expected: Vec<Gram> = vocab.grams().cloned().collect();
        if grams != expected {
            return Err(parse(1, "header grams do not match the vocabulary".into()));
        }

        let mut data = LabeledDataset::new(Vec::new());
        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let label: usize = fields
                .next()
                .unwrap()
                .parse()
                .map_err(|_| parse(lineno, "bad label".into()))?;
            let values: Vec<f64> = fields
                .map(|f| f.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| parse(lineno, "bad feature value".into()))?;
            if values.len() != vocab.len() {
                return Err(parse(
                    lineno,
                    format!("expected {} values, found {}", vocab.len(), values.len()),
                ));
            }
            data.push(
                FeatureVector { values, vocab_id: vocab.id().to_owned(), norm },
                label,
            );
        }
        let n_classes = data.labels.iter().copied().max().map_or(0, |m| m + 1);
        data.class_names = (0..n_classes).map(|c| c.to_string()).collect();
        Ok(data)
    }
}
