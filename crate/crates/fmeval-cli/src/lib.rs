//! Library half of the `fmeval` binary: batch scoring, report emission, and
//! the brute-force oracle suite, kept in a lib so integration tests can
//! drive them directly.

pub mod batch;
pub mod reference;
pub mod report;
pub mod selftest;

pub use batch::{BatchOutcome, PairFailure, RunConfig};
pub use report::{ConfigEcho, JsonReport, MetaRecord, ReportFormat, ScoreRecord};
