//! Binary inspection and the static classification pipeline.

use crate::{
    create_writer, fmt_f64, input_error, model_failure, open_reader, out_writer, parse_list,
    persist_failure, read_file, require_out, Failure, OrFail, StaticKind,
};
use anyhow::anyhow;
use rvguard::decode::decode_stream;
use rvguard::elf::parse_elf;
use rvguard::model::{fine_tune as tune_mlp, train_mlp, train_nb, TrainConfig};
use rvguard::ngram::{build_vocab, extract_ngrams, vectorize, LabeledDataset, NgramVocab, Norm, Selection};
use rvguard::persist::{load_model, save_model, AnyModel, ModelFile};
use rvguard::synth::read_corpus_dir;
use std::io::Write;
use std::path::{Path, PathBuf};

fn file_stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "input".to_string(), |s| s.to_string_lossy().into_owned())
}

pub fn inspect_elf(out: &Option<PathBuf>, elf: &Path, strict: bool) -> Result<(), Failure> {
    let data = read_file(elf)?;
    let image = parse_elf(&data, strict).or_input(&format!("parsing {}", elf.display()))?;
    let mut w = out_writer(out)?;
    let render = |r: std::io::Result<()>| r.or_input("writing report");

    render(writeln!(
        w,
        "machine: {} ({})",
        image.machine,
        if image.is_riscv() { "riscv" } else { "not riscv" }
    ))?;
    render(writeln!(w, "entry: {:#x}", image.entry))?;
    render(writeln!(w, "sections: {}", image.sections.len()))?;
    render(writeln!(w, "name,type,flags,addr,size,code"))?;
    for s in &image.sections {
        let mut flags = String::new();
        for (set, c) in [(s.flags.alloc, 'a'), (s.flags.exec, 'x'), (s.flags.write, 'w')] {
            flags.push(if set { c } else { '-' });
        }
        render(writeln!(
            w,
            "{},{},{},{:#x},{},{}",
            s.name,
            s.sh_type,
            flags,
            s.addr,
            s.size,
            if s.is_code() { 1 } else { 0 }
        ))?;
    }
    Ok(())
}

pub fn decode(out: &Option<PathBuf>, elf: &Path) -> Result<(), Failure> {
    let data = read_file(elf)?;
    let image = parse_elf(&data, true).or_input(&format!("parsing {}", elf.display()))?;
    let runs = image.code_bytes();
    if runs.is_empty() {
        return Err(input_error(anyhow!("{}: no executable sections", elf.display())));
    }
    let seq = decode_stream(runs, file_stem(elf));
    log::info!("decoded {} tokens from {}", seq.len(), elf.display());
    seq.write_tokens(out_writer(out)?).or_input("writing tokens")
}

#[allow(clippy::too_many_arguments)]
pub fn features(
    out: &Option<PathBuf>,
    corpus_dir: &Path,
    n: usize,
    max_size: usize,
    min_doc_freq: usize,
    selection: Selection,
    norm: Norm,
    vocab_out: &Path,
) -> Result<(), Failure> {
    let (corpus, class_names) = read_corpus_dir(corpus_dir)
        .or_input(&format!("reading corpus {}", corpus_dir.display()))?;
    if corpus.is_empty() {
        return Err(input_error(anyhow!("{}: corpus is empty", corpus_dir.display())));
    }
    let grams: Vec<_> = corpus
        .iter()
        .map(|(seq, class)| extract_ngrams(&seq.tokens, n).map(|g| (g, *class)))
        .collect::<Result<_, _>>()
        .or_input("extracting grams")?;
    let vocab = build_vocab(&grams, n, max_size, min_doc_freq, selection)
        .or_input("building vocabulary")?;
    vocab
        .write(create_writer(vocab_out)?)
        .or_input(&format!("writing {}", vocab_out.display()))?;
    log::info!("vocabulary: {} grams of length {n}, id {}", vocab.len(), vocab.id());

    let mut data = LabeledDataset::new(class_names);
    for (seq, class) in &corpus {
        data.push(vectorize(&seq.tokens, &vocab, norm), *class);
    }
    data.write_csv(&vocab, out_writer(out)?).or_input("writing feature matrix")
}

fn load_dataset(
    data: &Path,
    vocab: &Path,
    norm: Norm,
) -> Result<(LabeledDataset, NgramVocab), Failure> {
    let vocab_path = vocab.display().to_string();
    let vocab = NgramVocab::read(open_reader(vocab)?, &vocab_path)
        .or_input(&format!("reading vocabulary {vocab_path}"))?;
    let data_path = data.display().to_string();
    let data = LabeledDataset::read_csv(open_reader(data)?, &vocab, norm, &data_path)
        .or_input(&format!("reading feature matrix {data_path}"))?;
    Ok((data, vocab))
}

#[allow(clippy::too_many_arguments)]
pub fn train_static(
    out: &Option<PathBuf>,
    kind: StaticKind,
    data: &Path,
    vocab: &Path,
    norm: Norm,
    alpha: f64,
    hidden: &str,
    learning_rate: f64,
    epochs: usize,
    batch_size: usize,
    l2: f64,
    seed: u64,
) -> Result<(), Failure> {
    let (data, _) = load_dataset(data, vocab, norm)?;
    let model = match kind {
        StaticKind::Nb => {
            if alpha <= 0.0 {
                return Err(input_error(anyhow!("--alpha must be positive")));
            }
            AnyModel::Nb(train_nb(&data, alpha).map_err(|e| model_failure(e, "training nb"))?)
        }
        StaticKind::Mlp => {
            let hidden: Vec<usize> = parse_list(hidden, "hidden width")?;
            if batch_size == 0 || epochs == 0 {
                return Err(input_error(anyhow!("--epochs and --batch-size must be positive")));
            }
            let cfg = TrainConfig {
                learning_rate,
                epochs,
                batch_size,
                seed,
                l2_penalty: l2,
                frozen_layer_count: 0,
            };
            let (model, losses) =
                train_mlp(&data, &hidden, &cfg).map_err(|e| model_failure(e, "training mlp"))?;
            log::info!("final training loss {:.6}", losses.last().copied().unwrap_or(f64::NAN));
            AnyModel::Mlp(model)
        }
    };
    let path = require_out(out, "train-static")?;
    save_model(&ModelFile::new(model, data.class_names.clone()), path)
        .map_err(|e| persist_failure(e, "saving model"))
}

#[allow(clippy::too_many_arguments)]
pub fn fine_tune(
    out: &Option<PathBuf>,
    base: &Path,
    data: &Path,
    vocab: &Path,
    norm: Norm,
    frozen_layers: Option<usize>,
    learning_rate: f64,
    epochs: usize,
    batch_size: usize,
    l2: f64,
    seed: u64,
) -> Result<(), Failure> {
    let file = load_model(base).map_err(|e| persist_failure(e, "loading base model"))?;
    let AnyModel::Mlp(base_mlp) = file.model else {
        return Err(input_error(anyhow!(
            "{}: fine-tune needs an mlp model, found {:?}",
            base.display(),
            file.model.kind()
        )));
    };
    let (data, _) = load_dataset(data, vocab, norm)?;
    let frozen = frozen_layers.unwrap_or(base_mlp.n_layers().saturating_sub(1));
    if frozen >= base_mlp.n_layers() {
        return Err(input_error(anyhow!(
            "--frozen-layers {frozen} leaves nothing to tune in a {}-layer model",
            base_mlp.n_layers()
        )));
    }
    if batch_size == 0 || epochs == 0 {
        return Err(input_error(anyhow!("--epochs and --batch-size must be positive")));
    }
    let cfg = TrainConfig {
        learning_rate,
        epochs,
        batch_size,
        seed,
        l2_penalty: l2,
        frozen_layer_count: frozen,
    };
    let (tuned, losses) =
        tune_mlp(&base_mlp, &data, &cfg).map_err(|e| model_failure(e, "fine-tuning"))?;
    log::info!(
        "froze {frozen} of {} layers, final loss {:.6}",
        tuned.n_layers(),
        losses.last().copied().unwrap_or(f64::NAN)
    );
    let path = require_out(out, "fine-tune")?;
    save_model(&ModelFile::new(AnyModel::Mlp(tuned), data.class_names.clone()), path)
        .map_err(|e| persist_failure(e, "saving model"))
}

pub fn classify(
    out: &Option<PathBuf>,
    model: &Path,
    data: &Path,
    vocab: &Path,
    norm: Norm,
) -> Result<(), Failure> {
    let file = load_model(model).map_err(|e| persist_failure(e, "loading model"))?;
    let Some(clf) = file.model.as_classifier() else {
        return Err(input_error(anyhow!(
            "{}: classify needs a static model, found {:?}",
            model.display(),
            file.model.kind()
        )));
    };
    let (data, _) = load_dataset(data, vocab, norm)?;
    let mut w = out_writer(out)?;
    writeln!(w, "row,truth,prediction,confidence").or_input("writing predictions")?;
    for (i, (fv, &label)) in data.rows.iter().zip(&data.labels).enumerate() {
        let (class, confidence) =
            clf.predict(fv).map_err(|e| model_failure(e, "predicting"))?;
        writeln!(
            w,
            "{i},{},{},{}",
            file.class_name(label),
            file.class_name(class),
            fmt_f64(confidence)
        )
        .or_input("writing predictions")?;
    }
    Ok(())
}
