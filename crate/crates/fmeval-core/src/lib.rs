//! Core types and measures for binary foreground-map evaluation.
//!
//! The crate is organised around a small set of pixel-map types ([`GrayMap`],
//! [`BinaryMap`], [`Dimensions`]) and the measures that compare a foreground
//! map (FM) against a ground-truth mask (GT):
//!
//! * [`emeasure`] — the enhanced-alignment measure, which couples per-pixel
//!   agreement with image-level statistics through a bias/alignment matrix
//!   chain.
//! * [`classic`] — F-beta, Jaccard/IoU, and the dependency-weighted F-beta
//!   built on an exact Euclidean distance transform.
//! * [`rank`] — tie-aware Spearman correlation, the `theta = 1 - rho`
//!   ranking distance, and retrieval-list scoring.
//!
//! All operations are pure functions over immutable inputs; every type is
//! `Send + Sync` and safe to share across threads.

pub mod classic;
pub mod emeasure;
pub mod map;
pub mod measure;
pub mod rank;

pub use classic::{ConfusionCounts, FbwWeighting};
pub use emeasure::PixelMatrix;
pub use map::{BinaryMap, Dimensions, GrayMap, ThresholdMode};
pub use measure::MeasureId;

use std::path::PathBuf;

/// A measure result together with a flag recording whether any
/// division-by-zero or constant-GT fallback policy fired while computing it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub value: f64,
    pub degenerate: bool,
}

impl Score {
    pub(crate) fn clean(value: f64) -> Self {
        Score { value, degenerate: false }
    }

    pub(crate) fn degenerate(value: f64) -> Self {
        Score { value, degenerate: true }
    }
}

/// Errors produced by map loading and measure evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read image {path}: {source}")]
    ImageRead {
        path: PathBuf,
        source: image::ImageError,
    },
    #[error("failed to write image {path}: {source}")]
    ImageWrite {
        path: PathBuf,
        source: image::ImageError,
    },
    #[error("unsupported pixel format {format} in {path} (expected 8-bit grayscale or RGB)")]
    UnsupportedFormat { path: PathBuf, format: String },
    #[error("image dimensions must be at least 1x1")]
    ZeroDimension,
    #[error("value {value} at index {index} is outside [0, 1]")]
    ValueOutOfRange { index: usize, value: f64 },
    #[error("buffer of length {actual} does not match {dims} pixels")]
    LengthMismatch { dims: Dimensions, actual: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: Dimensions, right: Dimensions },
    #[error("ranking needs at least 2 items, got {0}")]
    RankingTooShort(usize),
    #[error("duplicate item id {0:?} in ranking")]
    DuplicateItem(String),
    #[error("ranking item sets differ: {0:?} is not in both lists")]
    MismatchedItems(String),
    #[error("unknown measure id {0:?} (expected emeasure, f1, fbeta:<beta>, iou, or fbw)")]
    InvalidMeasureId(String),
    #[error("invalid threshold mode {0:?} (expected asis, fixed:<t>, or adaptive)")]
    InvalidThresholdMode(String),
    #[error("retrieval dump parse error at line {line}: {message}")]
    DumpParse { line: usize, message: String },
}

/// Neumaier-compensated summation; the result is independent of hardware
/// and accurate to within a few ulps regardless of input length.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut compensation = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}
