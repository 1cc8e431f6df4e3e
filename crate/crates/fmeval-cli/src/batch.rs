//! Batch evaluation: manifests in, sorted score records and meta-measure
//! results out.
//!
//! Scoring work items are independent (image, model) pairs scheduled on a
//! rayon pool sized by the config; records are sorted afterwards, so the
//! output is byte-identical at any parallelism level. Missing or unreadable
//! files abort the run; a dimension mismatch only fails its own pair and is
//! reported at the end.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Context;
use fmeval_core::map::ThresholdMode;
use fmeval_core::measure::{self, MeasureId};
use fmeval_harness::manifest::{load_candidate_sets, load_manifest, load_triples};
use fmeval_harness::meta::{
    CandidateSet, MetaId, MetaResult, TrivialMapSource, misrank_rate, mm4_human_theta,
    mm5_gt_switch_rate, select_good_images,
};
use rayon::prelude::*;

use crate::report::{ConfigEcho, ReportFormat, ScoreRecord};

/// Fraction of images kept by good-map selection before the mis-ranking
/// protocols run.
pub const DEFAULT_KEEP_FRACTION: f64 = 0.8;

/// Everything a batch run needs beyond the subcommand itself.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub measures: Vec<MeasureId>,
    pub threshold: ThresholdMode,
    pub seed: u64,
    /// Worker threads; 0 means one per core.
    pub jobs: usize,
    pub format: ReportFormat,
    /// Report destination; stdout when absent.
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            manifest: self.manifest.clone(),
            measures: self.measures.iter().map(|m| m.to_string()).collect(),
            threshold: self.threshold.to_string(),
            seed: self.seed,
            jobs: self.jobs,
            format: self.format.to_string(),
        }
    }
}

/// A pair that could not be scored; the batch continues without it.
#[derive(Debug, Clone, PartialEq)]
pub struct PairFailure {
    pub image_id: String,
    pub model: String,
    pub measure: String,
    pub error: String,
}

/// Records plus per-pair failures; the exit code is nonzero iff any failure
/// was recorded.
#[derive(Debug)]
pub struct BatchOutcome {
    pub records: Vec<ScoreRecord>,
    pub failures: Vec<PairFailure>,
}

fn thread_pool(jobs: usize) -> anyhow::Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("building worker pool")
}

/// Scores every (image, model, measure) triple in the manifest. Loading
/// stays strict (a missing or unreadable file aborts the run), but a model
/// map whose dimensions disagree with its ground truth only fails its own
/// pairs, so the batch does not validate dimensions up front.
pub fn run_score_batch(config: &RunConfig) -> anyhow::Result<BatchOutcome> {
    anyhow::ensure!(!config.measures.is_empty(), "at least one measure id is required");
    let manifest = load_manifest(&config.manifest)
        .with_context(|| format!("loading manifest {}", config.manifest.display()))?;

    let mut work: Vec<(String, std::sync::Arc<fmeval_core::BinaryMap>, String, fmeval_core::BinaryMap)> =
        Vec::new();
    for img in &manifest.images {
        let gt = std::sync::Arc::new(fmeval_core::map::load_binary(&img.gt_path)?);
        for (model_name, map_path) in &img.maps {
            let fm = fmeval_core::map::load_with_mode(map_path, config.threshold)?;
            work.push((img.id.clone(), gt.clone(), model_name.clone(), fm));
        }
    }

    let pool = thread_pool(config.jobs)?;
    let threshold = config.threshold.to_string();
    let results: Vec<(Vec<ScoreRecord>, Vec<PairFailure>)> = pool.install(|| {
        work.par_iter()
            .map(|(image_id, gt, model_name, fm)| {
                let mut records = Vec::new();
                let mut failures = Vec::new();
                for &measure in &config.measures {
                    match measure::evaluate(measure, gt, fm) {
                        Ok(score) => records.push(ScoreRecord {
                            image_id: image_id.clone(),
                            measure: measure.to_string(),
                            score: score.value,
                            degenerate: score.degenerate,
                            params: BTreeMap::from([
                                ("model".to_string(), model_name.clone()),
                                ("threshold".to_string(), threshold.clone()),
                            ]),
                        }),
                        Err(err) => failures.push(PairFailure {
                            image_id: image_id.clone(),
                            model: model_name.clone(),
                            measure: measure.to_string(),
                            error: err.to_string(),
                        }),
                    }
                }
                (records, failures)
            })
            .collect()
    });

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (r, f) in results {
        records.extend(r);
        failures.extend(f);
    }
    records.sort_by(|a, b| {
        (&a.image_id, &a.measure, params_key(&a.params))
            .cmp(&(&b.image_id, &b.measure, params_key(&b.params)))
    });
    failures.sort_by(|a, b| {
        (&a.image_id, &a.model, &a.measure).cmp(&(&b.image_id, &b.model, &b.measure))
    });
    Ok(BatchOutcome { records, failures })
}

fn params_key(params: &BTreeMap<String, String>) -> String {
    params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// Runs one meta-measure for every configured measure. The mis-ranking
/// protocols (mm2/mm3) first keep the top [`DEFAULT_KEEP_FRACTION`] of
/// images by mean F1, mirroring the good-map selection step.
pub fn run_meta(config: &RunConfig, meta: MetaId) -> anyhow::Result<Vec<MetaResult>> {
    anyhow::ensure!(!config.measures.is_empty(), "at least one measure id is required");
    let manifest = load_manifest(&config.manifest)
        .with_context(|| format!("loading manifest {}", config.manifest.display()))?;

    let mut results = Vec::with_capacity(config.measures.len());
    match meta {
        MetaId::Mm2 | MetaId::Mm3 => {
            let sets = load_candidate_sets(&manifest, config.threshold)?;
            let kept = select_good_images(&sets, MeasureId::F1, DEFAULT_KEEP_FRACTION)?;
            let selected: Vec<CandidateSet> = sets
                .into_iter()
                .filter(|s| kept.contains(&s.image_id().to_string()))
                .collect();
            let source = if meta == MetaId::Mm2 {
                TrivialMapSource::Generic
            } else {
                TrivialMapSource::Noise
            };
            for &measure in &config.measures {
                results.push(misrank_rate(&selected, source, measure, config.seed)?);
            }
        }
        MetaId::Mm4 => {
            let triples = load_triples(&manifest, config.threshold)
                .context("mm4 needs triple records in the manifest")?;
            for &measure in &config.measures {
                results.push(mm4_human_theta(&triples, measure)?);
            }
        }
        MetaId::Mm5 => {
            let sets = load_candidate_sets(&manifest, config.threshold)?;
            for &measure in &config.measures {
                results.push(mm5_gt_switch_rate(&sets, measure, config.seed)?);
            }
        }
    }
    Ok(results)
}
