//! Meta-measure harness: synthetic corpora, perturbation models, and the
//! MM2-MM5 protocols for judging evaluation measures themselves.
//!
//! Everything is deterministic per master seed: each image or (image, model)
//! work item draws from its own ChaCha8 stream derived from the seed and a
//! stable label hash, so serial and parallel runs agree bit for bit.

pub mod manifest;
pub mod meta;
pub mod rng;
pub mod synth;

pub use manifest::{Manifest, ManifestImage, ManifestTriple};
pub use meta::{CandidateSet, HumanRankedTriple, MetaId, MetaResult, TrivialMapSource};
pub use synth::{NoiseConfig, Perturbation, SynthConfig};

use std::path::PathBuf;

/// Errors from corpus generation, manifest handling, and meta-measure runs.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] fmeval_core::Error),
    #[error("perturbation produced a constant map; the magnitude is too large for this input")]
    PerturbDegenerate,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("keep fraction must be in (0, 1], got {0}")]
    InvalidKeepFraction(f64),
    #[error("ground-truth switch needs at least 2 images, got {0}")]
    TooFewImages(usize),
    #[error("candidate set {0:?} has no model maps")]
    NoModels(String),
    #[error("human order {0:?} is not a permutation of the three map indices")]
    InvalidHumanOrder(String),
    #[error("synthetic corpus needs dimensions of at least 8x8, got {0}")]
    CorpusTooSmall(fmeval_core::Dimensions),
    #[error("manifest parse error at line {line}: {message}")]
    ManifestParse { line: usize, message: String },
    #[error("manifest has no {0} records")]
    MissingSection(&'static str),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}
