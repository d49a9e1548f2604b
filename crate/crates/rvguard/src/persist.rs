//! One versioned on-disk format for every trainable model.
//!
//! A model file is a JSON document `{format_version, kind, vocab_id,
//! class_names, params}` where `params` holds the model's own fields with
//! numeric arrays in row-major order. Everything saved here loads back with
//! bit-identical parameters (and therefore bit-identical predictions):
//! floats survive because JSON emission uses shortest-round-trip notation,
//! and non-finite values are rejected up front since JSON cannot carry them.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::detect::{
    AdaBoostModel, AnomalyScorer, BaggingModel, GaussianOneClass, KnnOneClass, LabelPredictor,
    TwoStageModel,
};
use crate::model::{Classifier, MlpModel, NbModel};
use crate::select::PcaModel;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PersistError {
    #[error("io error: {0}")]
    Io(String),
    #[error("malformed model document: {0}")]
    Json(String),
    #[error("unsupported model format version {found}, this build reads {FORMAT_VERSION}")]
    UnsupportedVersion { found: u64 },
    #[error("unknown model kind {kind:?}")]
    UnknownKind { kind: String },
    #[error("model parameters contain a non-finite number at {field}")]
    NonFinite { field: String },
    #[error("expected a {expected} model, found {found:?}")]
    WrongKind { expected: &'static str, found: String },
}

impl From<io::Error> for PersistError {
    fn from(e: io::Error) -> Self {
        PersistError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for PersistError {
    fn from(e: serde_json::Error) -> Self {
        PersistError::Json(e.to_string())
    }
}

/// Any model the toolkit can train.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyModel {
    Nb(NbModel),
    Mlp(MlpModel),
    Pca(PcaModel),
    Gauss(GaussianOneClass),
    Knn(KnnOneClass),
    AdaBoost(AdaBoostModel),
    Bagging(BaggingModel),
    TwoStage(TwoStageModel),
}

impl AnyModel {
    /// Stable tag stored in the file's `kind` field.
    pub fn kind(&self) -> &'static str {
        match self {
            AnyModel::Nb(_) => "nb",
            AnyModel::Mlp(_) => "mlp",
            AnyModel::Pca(_) => "pca",
            AnyModel::Gauss(_) => "gauss",
            AnyModel::Knn(_) => "knn",
            AnyModel::AdaBoost(_) => "adaboost",
            AnyModel::Bagging(_) => "bagging",
            AnyModel::TwoStage(_) => "two_stage",
        }
    }

    /// Vocabulary identity for vocabulary-bound models, empty otherwise.
    pub fn vocab_id(&self) -> &str {
        match self {
            AnyModel::Nb(m) => &m.vocab_id,
            AnyModel::Mlp(m) => &m.vocab_id,
            _ => "",
        }
    }

    /// The model as a static classifier, when it is one.
    pub fn as_classifier(&self) -> Option<&dyn Classifier> {
        match self {
            AnyModel::Nb(m) => Some(m),
            AnyModel::Mlp(m) => Some(m),
            _ => None,
        }
    }

    /// The model as a one-class scorer, when it is one.
    pub fn as_scorer(&self) -> Option<&dyn AnomalyScorer> {
        match self {
            AnyModel::Gauss(m) => Some(m),
            AnyModel::Knn(m) => Some(m),
            _ => None,
        }
    }

    /// The model as a label-voting ensemble, when it is one.
    pub fn as_label_predictor(&self) -> Option<&dyn LabelPredictor> {
        match self {
            AnyModel::AdaBoost(m) => Some(m),
            AnyModel::Bagging(m) => Some(m),
            _ => None,
        }
    }
}

/// A model plus the display names its integer classes map to (empty when
/// not applicable).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: AnyModel,
    pub class_names: Vec<String>,
}

impl ModelFile {
    pub fn new(model: AnyModel, class_names: Vec<String>) -> ModelFile {
        ModelFile { model, class_names }
    }

    /// Renders a class index through `class_names`, falling back to the
    /// bare number.
    pub fn class_name(&self, class: usize) -> String {
        self.class_names.get(class).cloned().unwrap_or_else(|| class.to_string())
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format_version: u64,
    kind: String,
    vocab_id: String,
    class_names: Vec<String>,
    params: Value,
}

/// Depth-first scan for `null`, which is what a non-finite float becomes in
/// JSON. None of our parameter schemas contain a legitimate null.
fn find_null(value: &Value, path: &str) -> Option<String> {
    match value {
        Value::Null => Some(path.to_string()),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .find_map(|(i, v)| find_null(v, &format!("{path}[{i}]"))),
        Value::Object(map) => {
            map.iter().find_map(|(k, v)| find_null(v, &format!("{path}.{k}")))
        }
        _ => None,
    }
}

/// Writes the versioned model document (pretty JSON, trailing newline).
pub fn write_model<W: Write>(file: &ModelFile, mut w: W) -> Result<(), PersistError> {
    let params = match &file.model {
        AnyModel::Nb(m) => serde_json::to_value(m),
        AnyModel::Mlp(m) => serde_json::to_value(m),
        AnyModel::Pca(m) => serde_json::to_value(m),
        AnyModel::Gauss(m) => serde_json::to_value(m),
        AnyModel::Knn(m) => serde_json::to_value(m),
        AnyModel::AdaBoost(m) => serde_json::to_value(m),
        AnyModel::Bagging(m) => serde_json::to_value(m),
        AnyModel::TwoStage(m) => serde_json::to_value(m),
    }?;
    if let Some(field) = find_null(&params, "params") {
        return Err(PersistError::NonFinite { field });
    }
    let envelope = Envelope {
        format_version: u64::from(FORMAT_VERSION),
        kind: file.model.kind().to_string(),
        vocab_id: file.model.vocab_id().to_string(),
        class_names: file.class_names.clone(),
        params,
    };
    serde_json::to_writer_pretty(&mut w, &envelope)?;
    writeln!(w)?;
    Ok(())
}

/// Reads a versioned model document.
pub fn read_model<R: Read>(r: R) -> Result<ModelFile, PersistError> {
    let envelope: Envelope = serde_json::from_reader(r)?;
    if envelope.format_version != u64::from(FORMAT_VERSION) {
        return Err(PersistError::UnsupportedVersion { found: envelope.format_version });
    }
    if let Some(field) = find_null(&envelope.params, "params") {
        return Err(PersistError::NonFinite { field });
    }
    let params = envelope.params;
    let model = match envelope.kind.as_str() {
        "nb" => AnyModel::Nb(serde_json::from_value(params)?),
        "mlp" => AnyModel::Mlp(serde_json::from_value(params)?),
        "pca" => AnyModel::Pca(serde_json::from_value(params)?),
        "gauss" => AnyModel::Gauss(serde_json::from_value(params)?),
        "knn" => AnyModel::Knn(serde_json::from_value(params)?),
        "adaboost" => AnyModel::AdaBoost(serde_json::from_value(params)?),
        "bagging" => AnyModel::Bagging(serde_json::from_value(params)?),
        "two_stage" => AnyModel::TwoStage(serde_json::from_value(params)?),
        other => return Err(PersistError::UnknownKind { kind: other.to_string() }),
    };
    Ok(ModelFile { model, class_names: envelope.class_names })
}

pub fn save_model(file: &ModelFile, path: &Path) -> Result<(), PersistError> {
    let f = fs::File::create(path)?;
    write_model(file, io::BufWriter::new(f))
}

pub fn load_model(path: &Path) -> Result<ModelFile, PersistError> {
    let f = fs::File::open(path)?;
    read_model(io::BufReader::new(f))
}
