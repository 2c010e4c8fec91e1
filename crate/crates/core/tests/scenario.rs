use convergence_core::ingest::read_tweets;
use convergence_core::netmap::read_follows;
use convergence_core::synth::{
    gen_convergence_scenario, gen_lda_corpus, gen_sbm_graph, ScenarioConfig,
};

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = gen_convergence_scenario(&ScenarioConfig::linear(6, 10, 3)).unwrap();
    scenario.write_to_dir(dir.path()).unwrap();
    let parsed = read_tweets(&dir.path().join("tweets.jsonl"), true).unwrap();
    assert_eq!(parsed.tweets, scenario.tweets);
    assert!(parsed.skipped.is_empty());
    assert_eq!(
        read_follows(&dir.path().join("follows.csv")).unwrap(),
        scenario.edges
    );

    let truth: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("ground_truth.json")).unwrap(),
    )
    .unwrap();
    for key in [
        "planted_blocks",
        "planted_phi",
        "lambda_schedule",
        "true_mixture_jsd_per_week",
    ] {
        assert!(truth.get(key).is_some(), "missing {key}");
    }
    assert_eq!(truth["planted_blocks"]["a0"], 0);
    assert_eq!(truth["lambda_schedule"].as_array().unwrap().len(), 6);
    assert!(dir.path().join("pipeline.toml").exists());
}

#[test]
fn generators_are_bit_deterministic() {
    let config = ScenarioConfig::linear(4, 8, 21);
    let a = gen_convergence_scenario(&config).unwrap();
    let b = gen_convergence_scenario(&config).unwrap();
    assert_eq!(a.tweets, b.tweets);
    assert_eq!(a.edges, b.edges);
    assert_eq!(a.ground_truth_json(), b.ground_truth_json());
    let other = gen_convergence_scenario(&ScenarioConfig { seed: 22, ..config }).unwrap();
    assert_ne!(a.tweets, other.tweets);

    assert_eq!(
        gen_sbm_graph(&[5, 7], 0.6, 0.1, 4).unwrap(),
        gen_sbm_graph(&[5, 7], 0.6, 0.1, 4).unwrap()
    );
    assert_eq!(
        gen_lda_corpus(3, 12, 9, 15, 0.2, 4).unwrap(),
        gen_lda_corpus(3, 12, 9, 15, 0.2, 4).unwrap()
    );
}
