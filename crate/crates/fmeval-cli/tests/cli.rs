//! End-to-end tests against the built `fmeval` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fmeval_cli::JsonReport;

fn fmeval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmeval"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn synth_corpus(dir: &Path, images: usize) -> String {
    let out = fmeval(&[
        "synth",
        "--images",
        &images.to_string(),
        "--size",
        "32x32",
        "--seed",
        "7",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "synth failed: {out:?}");
    dir.join("manifest.txt").to_str().unwrap().to_string()
}

#[test]
fn synth_then_score_emits_sorted_csv() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_corpus(dir.path(), 4);
    let report = dir.path().join("scores.csv");

    let out = fmeval(&[
        "score",
        "--manifest",
        &manifest,
        "--measures",
        "emeasure,f1",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "score failed: {out:?}");

    let text = fs::read_to_string(&report).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    // Header + 4 images x 3 models x 2 measures.
    assert_eq!(lines.len(), 1 + 4 * 3 * 2);
    assert_eq!(lines[0], "image_id,measure,score,degenerate,params");
    // Records are sorted by (image id, measure, params).
    let keys: Vec<(String, String, String)> = lines[1..]
        .iter()
        .map(|row| {
            let mut fields = row.split(',');
            (
                fields.next().unwrap().to_string(),
                fields.next().unwrap().to_string(),
                fields.nth(2).unwrap().to_string(),
            )
        })
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted, "records must come out sorted");
    let emeasure_rows = lines[1..]
        .iter()
        .filter(|r| r.starts_with("img0000,emeasure"))
        .count();
    assert_eq!(emeasure_rows, 3);
}

#[test]
fn json_report_round_trips_and_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_corpus(dir.path(), 2);
    let report = dir.path().join("scores.json");

    let out = fmeval(&[
        "score",
        "--manifest",
        &manifest,
        "--measures",
        "iou",
        "--format",
        "json",
        "--seed",
        "9",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let parsed: JsonReport = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed.tool, "fmeval");
    assert_eq!(parsed.config.seed, 9);
    assert_eq!(parsed.config.measures, vec!["iou".to_string()]);
    assert_eq!(parsed.records.len(), 2 * 3);
    assert!(parsed.records.iter().all(|r| r.measure == "iou"));
}

#[test]
fn jobs_do_not_change_report_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_corpus(dir.path(), 6);
    let serial = dir.path().join("serial.csv");
    let parallel = dir.path().join("parallel.csv");

    for (jobs, path) in [("1", &serial), ("8", &parallel)] {
        let out = fmeval(&[
            "score",
            "--manifest",
            &manifest,
            "--jobs",
            jobs,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&serial).unwrap(), fs::read(&parallel).unwrap());
}

#[test]
fn missing_file_aborts_with_its_name() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest.txt");
    fs::write(&manifest, "image a\ngt nowhere.png\nmap m also_nowhere.png\n").unwrap();

    let out = fmeval(&["score", "--manifest", manifest.to_str().unwrap()]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("nowhere.png"), "stderr: {stderr}");
}

#[test]
fn dimension_mismatch_skips_pair_and_fails_run() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_corpus(dir.path(), 2);

    // Point one model of img0000 at a map with the wrong dimensions.
    let wrong = dir.path().join("img0000/wrong.png");
    let wrong_map = fmeval_core::BinaryMap::new(
        fmeval_core::Dimensions::new(16, 8).unwrap(),
        vec![true; 16 * 8],
    )
    .unwrap();
    fmeval_core::map::save_binary(&wrong_map, &wrong).unwrap();
    let mut text = fs::read_to_string(&manifest).unwrap();
    text = text.replace(
        "map sota_a img0000/sota_a.png",
        "map sota_a img0000/wrong.png",
    );
    fs::write(&manifest, text).unwrap();

    let report = dir.path().join("scores.csv");
    let out = fmeval(&[
        "score",
        "--manifest",
        &manifest,
        "--measures",
        "f1",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(!out.status.success(), "mismatch must give a nonzero exit");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("dimension mismatch"), "stderr: {stderr}");

    // The healthy pairs were still scored: 2 images x 3 models - 1 skipped.
    let lines = fs::read_to_string(&report).unwrap().lines().count();
    assert_eq!(lines, 1 + 5);
}

#[test]
fn meta_subcommand_runs_every_protocol() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_corpus(dir.path(), 6);

    // Attach triples so mm4 has input: model maps ranked a, b, c.
    let mut text = fs::read_to_string(&manifest).unwrap();
    for i in 0..6 {
        let id = format!("img{i:04}");
        text.push_str(&format!(
            "triple {id} {id}/sota_a.png {id}/sota_b.png {id}/sota_c.png 0,1,2\n"
        ));
    }
    fs::write(&manifest, text).unwrap();

    for meta in ["mm2", "mm3", "mm4", "mm5"] {
        let report = dir.path().join(format!("{meta}.csv"));
        let out = fmeval(&[
            "meta",
            "--id",
            meta,
            "--manifest",
            &manifest,
            "--measures",
            "emeasure,f1",
            "--out",
            report.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{meta} failed: {out:?}");
        let text = fs::read_to_string(&report).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "meta,measure,value,population,seed");
        assert_eq!(lines.len(), 3, "{meta} output: {text}");
        assert!(lines[1].starts_with(&format!("{meta},emeasure,")));
    }
}

#[test]
fn meta_mm4_without_triples_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_corpus(dir.path(), 2);
    let out = fmeval(&["meta", "--id", "mm4", "--manifest", &manifest]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("triple"), "stderr: {stderr}");
}

#[test]
fn selftest_passes_and_prints_one_line_per_check() {
    let out = fmeval(&["selftest", "--pairs", "10", "--seed", "3"]);
    assert!(out.status.success(), "selftest failed: {out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    let pass_lines = stdout.lines().filter(|l| l.contains("PASS")).count();
    assert_eq!(pass_lines, 5, "stdout: {stdout}");
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn one_image_two_measures_gives_two_records() {
    use fmeval_cli::batch::{RunConfig, run_score_batch};
    use fmeval_core::map::ThresholdMode;

    let dir = tempfile::tempdir().unwrap();
    let gt = fmeval_core::BinaryMap::new(
        fmeval_core::Dimensions::new(4, 4).unwrap(),
        (0..16).map(|i| i < 6).collect(),
    )
    .unwrap();
    fmeval_core::map::save_binary(&gt, &dir.path().join("gt.png")).unwrap();
    fmeval_core::map::save_binary(&gt, &dir.path().join("fm.png")).unwrap();
    let manifest = dir.path().join("manifest.txt");
    fs::write(&manifest, "image solo\ngt gt.png\nmap m fm.png\n").unwrap();

    let outcome = run_score_batch(&RunConfig {
        manifest,
        measures: vec!["emeasure".parse().unwrap(), "f1".parse().unwrap()],
        threshold: ThresholdMode::AsIs,
        seed: 42,
        jobs: 1,
        format: fmeval_cli::ReportFormat::Csv,
        out: None,
    })
    .unwrap();
    assert!(outcome.failures.is_empty());
    assert_eq!(outcome.records.len(), 2);
    // fm = gt: both measures score a clean 1.0.
    for record in &outcome.records {
        assert_eq!(record.score, 1.0, "{}", record.measure);
        assert!(!record.degenerate);
    }
}

#[test]
fn degenerate_policies_surface_in_records() {
    use fmeval_cli::batch::{RunConfig, run_score_batch};
    use fmeval_core::map::ThresholdMode;

    let dir = tempfile::tempdir().unwrap();
    let dims = fmeval_core::Dimensions::new(4, 4).unwrap();
    let empty_gt = fmeval_core::BinaryMap::new(dims, vec![false; 16]).unwrap();
    let fm = fmeval_core::BinaryMap::new(dims, (0..16).map(|i| i % 3 == 0).collect()).unwrap();
    fmeval_core::map::save_binary(&empty_gt, &dir.path().join("gt.png")).unwrap();
    fmeval_core::map::save_binary(&fm, &dir.path().join("fm.png")).unwrap();
    let manifest = dir.path().join("manifest.txt");
    fs::write(&manifest, "image hollow\ngt gt.png\nmap m fm.png\n").unwrap();

    let outcome = run_score_batch(&RunConfig {
        manifest,
        measures: vec!["emeasure".parse().unwrap(), "fbw".parse().unwrap()],
        threshold: ThresholdMode::AsIs,
        seed: 42,
        jobs: 1,
        format: fmeval_cli::ReportFormat::Csv,
        out: None,
    })
    .unwrap();
    assert_eq!(outcome.records.len(), 2);
    for record in &outcome.records {
        assert!(
            record.degenerate,
            "{} must flag its constant-GT policy",
            record.measure
        );
    }
}

#[test]
fn unknown_measure_or_threshold_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth_corpus(dir.path(), 2);
    let out = fmeval(&["score", "--manifest", &manifest, "--measures", "dice"]);
    assert!(!out.status.success());
    let out = fmeval(&["score", "--manifest", &manifest, "--threshold", "otsu"]);
    assert!(!out.status.success());
}
