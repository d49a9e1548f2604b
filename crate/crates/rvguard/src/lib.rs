//! Static and behavioral analysis toolkit for RISC-V malware detection.
//!
//! The crate covers both ends of the pipeline described in the guide under
//! `book/`:
//!
//! * **Static route**: parse a RISC-V ELF ([`elf`]), linearly decode its
//!   executable sections into an opcode token sequence ([`decode`]), turn
//!   token sequences into n-gram feature vectors ([`ngram`]), and classify
//!   them with naive Bayes or a small MLP ([`model`]).
//! * **Behavioral route**: load hardware-performance-counter traces
//!   ([`trace`]), windowize them into summary statistics, reduce or rank
//!   features ([`select`]), and run one-class or ensemble detectors
//!   ([`detect`]).
//!
//! Synthetic workload generation lives in [`synth`], shared evaluation
//! metrics in [`eval`], and the versioned model-file format in [`persist`].
//! Everything that consumes randomness takes an explicit `u64` seed and is
//! bit-for-bit reproducible across runs and platforms.

pub mod decode;
pub mod detect;
pub mod elf;
pub mod eval;
pub mod linalg;
pub mod model;
pub mod ngram;
pub mod persist;
pub mod select;
pub mod synth;
pub mod trace;

mod util;

#[cfg(doctest)]
mod guide;

pub use linalg::Matrix;
