//! `fmeval` — batch evaluation of binary foreground maps.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use fmeval_core::map::ThresholdMode;
use fmeval_core::measure::MeasureId;
use fmeval_core::Dimensions;
use fmeval_harness::manifest::write_corpus;
use fmeval_harness::meta::MetaId;
use fmeval_harness::synth::{SynthConfig, generate_corpus};

use fmeval_cli::batch::{RunConfig, run_meta, run_score_batch};
use fmeval_cli::report::{self, ReportFormat};
use fmeval_cli::selftest;

#[derive(Parser)]
#[command(name = "fmeval", version, about = "Binary foreground-map evaluation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonRunArgs {
    /// Corpus manifest path
    #[arg(long)]
    manifest: PathBuf,

    /// Comma-separated measure ids: emeasure, f1, fbeta:<beta>, iou, fbw
    #[arg(long, value_delimiter = ',', default_value = "emeasure,f1,iou,fbw")]
    measures: Vec<String>,

    /// How model maps are binarized: asis, fixed:<t>, or adaptive
    #[arg(long, default_value = "asis")]
    threshold: String,

    /// Master seed for every random draw in the run
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Worker threads (0 = one per core); output is identical either way
    #[arg(long, default_value_t = 0)]
    jobs: usize,

    /// Report format: csv or json
    #[arg(long, default_value = "csv")]
    format: String,

    /// Report path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Score every (image, model, measure) triple in a manifest
    Score(CommonRunArgs),

    /// Run a meta-measure protocol over a corpus
    Meta {
        /// Which protocol: mm2, mm3, mm4, or mm5
        #[arg(long)]
        id: String,

        #[command(flatten)]
        run: CommonRunArgs,
    },

    /// Generate a synthetic disk/blob corpus with a manifest
    Synth {
        /// Number of images
        #[arg(long)]
        images: usize,

        /// Image dimensions as WxH, e.g. 64x64
        #[arg(long, default_value = "64x64")]
        size: String,

        /// Master seed; the corpus is a pure function of (images, size, seed)
        #[arg(long, default_value_t = 42)]
        seed: u64,

        /// Output directory for images and manifest.txt
        #[arg(long)]
        out: PathBuf,
    },

    /// Run the brute-force oracle suite against the optimized measures
    Selftest {
        /// Seed for the random map pairs
        #[arg(long, default_value_t = 42)]
        seed: u64,

        /// Random pairs per comparison
        #[arg(long, default_value_t = 100)]
        pairs: usize,
    },
}

fn parse_run(args: &CommonRunArgs) -> anyhow::Result<RunConfig> {
    let measures = args
        .measures
        .iter()
        .map(|m| m.parse::<MeasureId>())
        .collect::<Result<Vec<_>, _>>()?;
    let threshold: ThresholdMode = args.threshold.parse()?;
    let format: ReportFormat = args.format.parse()?;
    Ok(RunConfig {
        manifest: args.manifest.clone(),
        measures,
        threshold,
        seed: args.seed,
        jobs: args.jobs,
        format,
        out: args.out.clone(),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("fmeval: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Score(args) => {
            let config = parse_run(&args)?;
            let outcome = run_score_batch(&config)?;
            let text = report::render_scores(&outcome.records, config.format, &config.echo())?;
            report::emit(&text, config.out.as_deref())?;
            if outcome.failures.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                for failure in &outcome.failures {
                    eprintln!(
                        "fmeval: skipped {}/{} for {}: {}",
                        failure.image_id, failure.model, failure.measure, failure.error
                    );
                }
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Meta { id, run: args } => {
            let meta: MetaId = id.parse().map_err(anyhow::Error::msg)?;
            let config = parse_run(&args)?;
            let results = run_meta(&config, meta)?;
            let text = report::render_meta(&results, config.format, &config.echo())?;
            report::emit(&text, config.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth { images, size, seed, out } => {
            let dims: Dimensions = size.parse()?;
            let corpus = generate_corpus(&SynthConfig { images, dims, seed })?;
            let manifest_path = write_corpus(&corpus, &out)?;
            println!(
                "wrote {} images ({} maps) to {}",
                corpus.len(),
                corpus.iter().map(|s| s.models().len() + 1).sum::<usize>(),
                manifest_path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest { seed, pairs } => {
            anyhow::ensure!(pairs > 0, "pairs must be positive");
            let mut stdout = std::io::stdout().lock();
            let all_passed =
                selftest::run(seed, pairs, &mut stdout).context("writing selftest output")?;
            Ok(if all_passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}
