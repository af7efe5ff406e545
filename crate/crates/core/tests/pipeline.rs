mod common;

use std::path::Path;
use std::process::Command;

use blogtensor::pipeline::{self, Method};
use blogtensor::PipelineConfig;
use common::*;

fn toy_config(dir: &Path) -> PipelineConfig {
    copy_toy(dir);
    PipelineConfig::load(&dir.join("config.toml")).unwrap()
}

fn cli(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_blogtensor"))
        .arg("--config")
        .arg(dir.join("config.toml"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

#[test]
fn toy_run_separates_the_two_topics() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = toy_config(tmp.path());
    let run = pipeline::run_all(&cfg, &[Method::Parafac, Method::Nmf]).unwrap();

    assert_eq!(run.ingest.parsed.len(), 12);
    assert!(run.ingest.skipped.is_empty());
    assert_eq!(run.build.blogs, 12);
    assert!(run.build.words > 0 && run.build.nonzeros > 0);

    for method in ["parafac", "nmf"] {
        let rows = read_cluster_csv(&cfg.paths.reports_dir.join(format!("clusters_{method}_r2.csv")));
        let mut topics = check_topic_purity(&rows).unwrap_or_else(|e| panic!("{method}: {e}"));
        topics.sort();
        assert_eq!(topics, ["astronomy", "cooking"], "{method}");
    }

    // 2 methods × 1 rank × 4 tasks, and 2 methods × 2 k values
    assert_eq!(run.evaluate.similarity.len(), 8);
    assert_eq!(run.evaluate.overlap.len(), 4);
    assert!(run
        .evaluate
        .similarity
        .iter()
        .all(|r| (0.0..=1.0 + 1e-12).contains(&r.similarity)));
    let sim_csv = std::fs::read_to_string(cfg.paths.reports_dir.join("similarity.csv")).unwrap();
    assert!(sim_csv.starts_with("method,dataset,R,task,similarity\nparafac,toy,2,1,"));
}

#[test]
fn stages_can_be_rerun_individually() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = toy_config(tmp.path());
    pipeline::cmd_ingest(&cfg).unwrap();
    let first = pipeline::cmd_build(&cfg).unwrap();
    let again = pipeline::cmd_build(&cfg).unwrap();
    assert_eq!(first, again);
    let runs = pipeline::cmd_decompose(&cfg, &[Method::Parafac]).unwrap();
    assert_eq!(runs.len(), 1);
    assert!(runs[0].path.ends_with("parafac_r2.json"));
    // NMF factors were never written
    let err = pipeline::cmd_evaluate(&cfg, &[Method::Nmf]).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    pipeline::cmd_evaluate(&cfg, &[Method::Parafac]).unwrap();
}

#[test]
fn unreadable_feeds_are_skipped() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = toy_config(tmp.path());
    let list = std::fs::read_to_string(&cfg.paths.feed_list).unwrap();
    std::fs::write(tmp.path().join("feeds/broken.rss"), "<rss><channel>").unwrap();
    std::fs::write(
        &cfg.paths.feed_list,
        format!("{list}feeds/missing.rss\nhttps://example.org/feed\nfeeds/broken.rss\n"),
    )
    .unwrap();
    let summary = pipeline::cmd_ingest(&cfg).unwrap();
    assert_eq!(summary.parsed.len(), 12);
    let skipped: Vec<&str> = summary.skipped.iter().map(|(l, _)| l.as_str()).collect();
    assert_eq!(
        skipped,
        ["feeds/missing.rss", "https://example.org/feed", "feeds/broken.rss"]
    );
}

#[test]
fn cli_run_all_succeeds_on_toy_corpus() {
    let tmp = tempfile::tempdir().unwrap();
    copy_toy(tmp.path());
    let out = cli(
        tmp.path(),
        &[
            "run-all",
            "--method",
            "parafac",
            "--ranks",
            "1,2",
            "--overlap-def",
            "intersection",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("ingested 12 feed(s), skipped 0"));
    assert!(stdout.contains("N = 12 blogs"));
    for f in [
        "out/factors/parafac_r1.json",
        "out/factors/parafac_r2.json",
        "out/reports/overlap.csv",
    ] {
        assert!(tmp.path().join(f).is_file(), "{f}");
    }
    assert!(!tmp.path().join("out/factors/nmf_r2.json").exists());
}

#[test]
fn cli_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    copy_toy(tmp.path());

    let missing = Command::new(env!("CARGO_BIN_EXE_blogtensor"))
        .args(["--config", "/nonexistent/config.toml", "ingest"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));

    // nothing built yet
    assert_eq!(cli(tmp.path(), &["build"]).status.code(), Some(1));
    assert_eq!(cli(tmp.path(), &["ingest", "--ranks", "0"]).status.code(), Some(1));

    assert!(cli(tmp.path(), &["ingest"]).status.success());
    assert!(cli(tmp.path(), &["build"]).status.success());
    assert!(cli(tmp.path(), &["decompose"]).status.success());
    // the literal task-1 product needs N = M = R, which the toy corpus is not
    let strict = cli(tmp.path(), &["evaluate", "--strict-paper"]);
    assert_eq!(strict.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&strict.stderr).contains("literal task-1 product"));
    assert!(cli(tmp.path(), &["evaluate"]).status.success());
}
