//! Report emission: deterministic CSV for diffable golden files, JSON with
//! run provenance.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, bail};
use fmeval_harness::MetaResult;
use serde::{Deserialize, Serialize};

/// One scored (image, model, measure) triple; the unit of every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub image_id: String,
    pub measure: String,
    pub score: f64,
    pub degenerate: bool,
    pub params: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportFormat::Csv => write!(f, "csv"),
            ReportFormat::Json => write!(f, "json"),
        }
    }
}

impl FromStr for ReportFormat {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => bail!("unknown format {s:?} (expected csv or json)"),
        }
    }
}

/// Config echo carried by JSON reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub manifest: PathBuf,
    pub measures: Vec<String>,
    pub threshold: String,
    pub seed: u64,
    pub jobs: usize,
    pub format: String,
}

/// Top-level JSON report document.
#[derive(Debug, Serialize, Deserialize)]
pub struct JsonReport {
    pub tool: String,
    pub version: String,
    pub config: ConfigEcho,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub records: Vec<ScoreRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub meta_results: Vec<MetaRecord>,
}

/// Serializable mirror of a [`MetaResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaRecord {
    pub meta: String,
    pub measure: String,
    pub value: f64,
    pub population: usize,
    pub seed: u64,
}

impl From<&MetaResult> for MetaRecord {
    fn from(result: &MetaResult) -> Self {
        MetaRecord {
            meta: result.meta.to_string(),
            measure: result.measure.to_string(),
            value: result.value,
            population: result.population,
            seed: result.seed,
        }
    }
}

/// Scores are printed with 12 decimal digits, enough to re-parse any value
/// in the measures' ranges to within 1e-11.
fn format_score(score: f64) -> String {
    format!("{score:.12}")
}

/// Minimal RFC 4180 quoting; ids and params rarely need it, but a comma in
/// an image id must not corrupt the table.
fn csv_field(value: &str) -> String {
    if value.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

fn params_field(params: &BTreeMap<String, String>) -> String {
    params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// CSV table of score records: header plus one LF-terminated row per record.
pub fn score_csv(records: &[ScoreRecord]) -> String {
    let mut out = String::from("image_id,measure,score,degenerate,params\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            csv_field(&r.image_id),
            csv_field(&r.measure),
            format_score(r.score),
            r.degenerate,
            csv_field(&params_field(&r.params)),
        ));
    }
    out
}

/// CSV table of meta-measure results.
pub fn meta_csv(results: &[MetaResult]) -> String {
    let mut out = String::from("meta,measure,value,population,seed\n");
    for r in results {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.meta,
            r.measure,
            format_score(r.value),
            r.population,
            r.seed,
        ));
    }
    out
}

fn json_document(report: &JsonReport) -> anyhow::Result<String> {
    let mut text = serde_json::to_string_pretty(report).context("serializing report")?;
    text.push('\n');
    Ok(text)
}

/// Renders score records in the requested format.
pub fn render_scores(
    records: &[ScoreRecord],
    format: ReportFormat,
    config: &ConfigEcho,
) -> anyhow::Result<String> {
    if records.is_empty() {
        bail!("refusing to emit an empty report");
    }
    match format {
        ReportFormat::Csv => Ok(score_csv(records)),
        ReportFormat::Json => json_document(&JsonReport {
            tool: "fmeval".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            records: records.to_vec(),
            meta_results: Vec::new(),
        }),
    }
}

/// Renders meta-measure results in the requested format.
pub fn render_meta(
    results: &[MetaResult],
    format: ReportFormat,
    config: &ConfigEcho,
) -> anyhow::Result<String> {
    if results.is_empty() {
        bail!("refusing to emit an empty report");
    }
    match format {
        ReportFormat::Csv => Ok(meta_csv(results)),
        ReportFormat::Json => json_document(&JsonReport {
            tool: "fmeval".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            records: Vec::new(),
            meta_results: results.iter().map(MetaRecord::from).collect(),
        }),
    }
}

/// Writes rendered report text to a file, or stdout when no path is given.
pub fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).context("writing stdout")?;
            Ok(())
        }
    }
}
