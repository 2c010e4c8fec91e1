use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_convergence"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn scenario(dir: &Path) -> String {
    let data = dir.join("data");
    let out = run(&[
        "synth",
        "scenario",
        "--weeks",
        "5",
        "--community-size",
        "15",
        "--seed",
        "5",
        "--out",
        data.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    data.join("pipeline.toml").to_str().unwrap().to_string()
}

#[test]
fn synth_scenario_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    scenario(dir.path());
    for name in [
        "tweets.jsonl",
        "follows.csv",
        "ground_truth.json",
        "pipeline.toml",
    ] {
        assert!(dir.path().join("data").join(name).is_file(), "{name}");
    }
}

#[test]
fn run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let config = scenario(dir.path());
    let out_dir = dir.path().join("out");
    let out = run(&[
        "run",
        "--config",
        &config,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in [
        "clusters_window.json",
        "map_window.svg",
        "topics.json",
        "theta.csv",
        "bridging.csv",
        "topic_bridges.csv",
        "divergence.csv",
        "report.md",
    ] {
        assert!(out_dir.join(name).is_file(), "{name}");
    }
}

#[test]
fn ingest_prints_summary_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let config = scenario(dir.path());
    let out_dir = dir.path().join("out");
    let out = run(&[
        "ingest",
        "--config",
        &config,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("tweets parsed:       450"), "{stdout}");
    assert!(!out_dir.exists());
}

#[test]
fn k_override_reaches_topic_model() {
    let dir = tempfile::tempdir().unwrap();
    let config = scenario(dir.path());
    let out_dir = dir.path().join("out");
    let out = run(&[
        "topics",
        "--config",
        &config,
        "--k",
        "7",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let topics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("topics.json")).unwrap())
            .unwrap();
    assert_eq!(topics.as_array().unwrap().len(), 7);
    assert!(!out_dir.join("report.md").exists());
}

#[test]
fn missing_tweets_exits_with_ingest_code() {
    let dir = tempfile::tempdir().unwrap();
    let config = scenario(dir.path());
    std::fs::remove_file(dir.path().join("data/tweets.jsonl")).unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "run",
        "--config",
        &config,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(10));
    assert!(!out_dir.exists());
}

#[test]
fn bad_config_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "no_such_key = 1\n").unwrap();
    assert_eq!(
        run(&["map", "--config", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["map"]).status.code(), Some(2));
}

#[test]
fn synth_sbm_and_corpus_files() {
    let dir = tempfile::tempdir().unwrap();
    let sbm = dir.path().join("sbm");
    assert!(run(&[
        "synth",
        "sbm",
        "--blocks",
        "4,4",
        "--p-in",
        "1",
        "--p-out",
        "0",
        "--out",
        sbm.to_str().unwrap()
    ])
    .status
    .success());
    let csv = std::fs::read_to_string(sbm.join("follows.csv")).unwrap();
    // two 4-cliques, both directions
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 6);
    assert!(sbm.join("blocks.json").is_file());

    let corpus = dir.path().join("corpus");
    assert!(run(&[
        "synth",
        "corpus",
        "--k",
        "2",
        "--vocab",
        "10",
        "--docs",
        "8",
        "--doc-len",
        "20",
        "--out",
        corpus.to_str().unwrap()
    ])
    .status
    .success());
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(corpus.join("corpus.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 8);
    let total: u64 = lines[0]["terms"]
        .as_object()
        .unwrap()
        .values()
        .map(|v| v.as_u64().unwrap())
        .sum();
    assert_eq!(total, 20);
    assert!(corpus.join("planted.json").is_file());
}
