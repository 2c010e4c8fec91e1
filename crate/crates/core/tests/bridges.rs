use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use convergence_core::bridge::{bridging_centrality, dominant_bridge, topic_bridging};
use convergence_core::ingest::WeekKey;
use convergence_core::netmap::build_follow_graph;
use convergence_core::synth::gen_sbm_graph;

/// Two dense blocks joined only through two connector accounts that talk
/// about topic 2; everyone else talks about topic 0 or 1.
#[test]
fn connector_topic_dominates() {
    let (mut edges, part) = gen_sbm_graph(&[15, 15], 0.6, 0.0, 5).unwrap();
    for (c, ends) in [("xa", ["v00", "v15"]), ("xb", ["v03", "v20"])] {
        for e in ends {
            edges.push((c.to_string(), e.to_string()));
            edges.push((e.to_string(), c.to_string()));
        }
    }
    let mut nodes: BTreeSet<String> = part.ids.iter().cloned().collect();
    nodes.extend(["xa".to_string(), "xb".to_string()]);
    let graph = build_follow_graph(&edges, &nodes);
    let scores = bridging_centrality(&graph);

    let blocks = part.block_map();
    let mut theta: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for id in &nodes {
        let row = match blocks.get(id) {
            Some(0) => vec![0.9, 0.05, 0.05],
            Some(_) => vec![0.05, 0.9, 0.05],
            None => vec![0.05, 0.05, 0.9],
        };
        theta.insert(id.clone(), row);
    }
    let week = WeekKey::from_monday(NaiveDate::from_ymd_opt(2020, 3, 2).unwrap()).unwrap();
    let rows: Vec<_> = (0..3)
        .map(|t| topic_bridging(&scores, &theta, t, week, 3).unwrap())
        .collect();
    assert_eq!(dominant_bridge(&rows, week).unwrap(), 2);
    assert!(rows[2].argmax.as_deref().unwrap().starts_with('x'));
    assert!(rows.iter().all(|r| r.max_bc == r.top[0].1));
}
