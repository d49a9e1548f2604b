//! Doc-test anchors for the guide under `book/`.
//!
//! Each item includes one chapter verbatim, so every fenced Rust block in
//! the book compiles and runs under `cargo test --doc`. A chapter that
//! drifts from the API fails the build here.

#[doc = include_str!("../../../book/src/introduction.md")]
pub struct Introduction;

#[doc = include_str!("../../../book/src/static/decoding.md")]
pub struct Decoding;

#[doc = include_str!("../../../book/src/static/ngrams.md")]
pub struct Ngrams;

#[doc = include_str!("../../../book/src/static/classifiers.md")]
pub struct Classifiers;

#[doc = include_str!("../../../book/src/behavioral/traces.md")]
pub struct Traces;

#[doc = include_str!("../../../book/src/behavioral/selection.md")]
pub struct Selection;

#[doc = include_str!("../../../book/src/behavioral/detectors.md")]
pub struct Detectors;

#[doc = include_str!("../../../book/src/shared/synthetic.md")]
pub struct Synthetic;

#[doc = include_str!("../../../book/src/shared/evaluation.md")]
pub struct Evaluation;

#[doc = include_str!("../../../book/src/shared/persistence.md")]
pub struct Persistence;

#[doc = include_str!("../../../book/src/cli.md")]
pub struct Cli;
