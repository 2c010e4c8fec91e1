//! Betweenness, bridging coefficient and bridging centrality per account,
//! aggregated into per-topic weekly bridge scores.

use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;

use crate::ingest::WeekKey;
use crate::netmap::FollowGraph;
use crate::topicmodel::TopicModel;
use crate::{Error, Result};

/// Sources per parallel work unit. Partial sums are added in chunk order so
/// the total does not depend on thread scheduling.
const SOURCE_CHUNK: usize = 32;

/// Per-node scores, indexed like the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgingScores {
    pub ids: Vec<String>,
    pub betweenness: Vec<f64>,
    pub bridging_coeff: Vec<f64>,
    pub bridging_centrality: Vec<f64>,
}

impl BridgingScores {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn centrality_of(&self, id: &str) -> Option<f64> {
        self.ids
            .binary_search_by(|s| s.as_str().cmp(id))
            .ok()
            .map(|i| self.bridging_centrality[i])
    }
}

/// Dependency contributions of a single source (Brandes).
fn single_source(graph: &FollowGraph, s: usize, delta_out: &mut [f64]) {
    let n = graph.len();
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    sigma[s] = 1.0;
    dist[s] = 0;
    queue.push_back(s);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in graph.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
                preds[w].push(v);
            }
        }
    }
    let mut delta = vec![0.0f64; n];
    for &w in order.iter().rev() {
        for &v in &preds[w] {
            delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
        }
        if w != s {
            delta_out[w] += delta[w];
        }
    }
}

/// Normalized betweenness on the undirected projection, endpoints excluded.
pub fn betweenness(graph: &FollowGraph) -> Vec<f64> {
    let n = graph.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let sources: Vec<usize> = (0..n).collect();
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(SOURCE_CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; n];
            for &s in chunk {
                single_source(graph, s, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; n];
    for p in partials {
        for (t, x) in total.iter_mut().zip(p) {
            *t += x;
        }
    }
    // each unordered pair is counted from both ends
    let norm = ((n - 1) * (n - 2)) as f64;
    total
        .into_iter()
        .map(|b| (b / norm).clamp(0.0, 1.0))
        .collect()
}

/// `BrC(v) = d(v)^-1 / sum over neighbors of d(i)^-1`; zero when isolated.
pub fn bridging_coefficient(graph: &FollowGraph) -> Vec<f64> {
    (0..graph.len())
        .map(|v| {
            let d = graph.degree(v);
            if d == 0 {
                return 0.0;
            }
            let denom: f64 = graph
                .neighbors(v)
                .iter()
                .map(|&i| 1.0 / graph.degree(i) as f64)
                .sum();
            (1.0 / d as f64) / denom
        })
        .collect()
}

pub fn bridging_centrality(graph: &FollowGraph) -> BridgingScores {
    let betweenness = betweenness(graph);
    let bridging_coeff = bridging_coefficient(graph);
    let bridging_centrality = betweenness
        .iter()
        .zip(&bridging_coeff)
        .map(|(b, c)| b * c)
        .collect();
    BridgingScores {
        ids: graph.ids().to_vec(),
        betweenness,
        bridging_coeff,
        bridging_centrality,
    }
}

/// θ rows of the documents in `week`, keyed by account.
pub fn week_theta(model: &TopicModel, week: WeekKey) -> BTreeMap<String, Vec<f64>> {
    model
        .doc_ids
        .iter()
        .zip(&model.theta)
        .filter(|(id, _)| id.week == week)
        .map(|(id, row)| (id.account_id.clone(), row.clone()))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicBridgeRow {
    pub week: WeekKey,
    pub topic: usize,
    pub max_bc: f64,
    pub argmax: Option<String>,
    /// Descending by score, ties by account id.
    pub top: Vec<(String, f64)>,
}

/// Scores each account with a document that week by `BC × θ[topic]`.
pub fn topic_bridging(
    scores: &BridgingScores,
    theta: &BTreeMap<String, Vec<f64>>,
    topic: usize,
    week: WeekKey,
    top_n: usize,
) -> Result<TopicBridgeRow> {
    let mut ranked = Vec::new();
    for (id, &bc) in scores.ids.iter().zip(&scores.bridging_centrality) {
        if let Some(row) = theta.get(id) {
            let &weight = row.get(topic).ok_or(Error::Index {
                index: topic,
                len: row.len(),
            })?;
            ranked.push((id.clone(), bc * weight));
        }
    }
    if ranked.is_empty() {
        log::warn!("week {week}: no mapped account has a document");
        return Ok(TopicBridgeRow {
            week,
            topic,
            max_bc: 0.0,
            argmax: None,
            top: Vec::new(),
        });
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let (argmax, max_bc) = ranked[0].clone();
    ranked.truncate(top_n.max(1));
    Ok(TopicBridgeRow {
        week,
        topic,
        max_bc,
        argmax: Some(argmax),
        top: ranked,
    })
}

/// Topic with the highest `max_bc` in `week`; ties go to the smallest id.
pub fn dominant_bridge(table: &[TopicBridgeRow], week: WeekKey) -> Result<usize> {
    table
        .iter()
        .filter(|r| r.week == week)
        .fold(None::<&TopicBridgeRow>, |best, r| match best {
            Some(b) if b.max_bc > r.max_bc || (b.max_bc == r.max_bc && b.topic < r.topic) => {
                Some(b)
            }
            _ => Some(r),
        })
        .map(|r| r.topic)
        .ok_or_else(|| Error::Empty(format!("no bridge rows for week {week}")))
}

fn csv_string(write: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    write(&mut w).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// `bridging.csv` from per-week scores.
pub fn bridging_csv(weeks: &[(WeekKey, BridgingScores)]) -> String {
    csv_string(|w| {
        w.write_record([
            "week",
            "account_id",
            "betweenness",
            "bridging_coeff",
            "bridging_centrality",
        ])?;
        for (week, s) in weeks {
            for i in 0..s.len() {
                w.write_record([
                    week.to_string(),
                    s.ids[i].clone(),
                    format!("{:.6}", s.betweenness[i]),
                    format!("{:.6}", s.bridging_coeff[i]),
                    format!("{:.6}", s.bridging_centrality[i]),
                ])?;
            }
        }
        Ok(())
    })
}

pub fn topic_bridges_csv(rows: &[TopicBridgeRow]) -> String {
    csv_string(|w| {
        w.write_record([
            "week",
            "topic_id",
            "max_bc",
            "argmax_account",
            "top_accounts",
        ])?;
        for r in rows {
            let top: Vec<&str> = r.top.iter().map(|(id, _)| id.as_str()).collect();
            w.write_record([
                r.week.to_string(),
                r.topic.to_string(),
                format!("{:.6}", r.max_bc),
                r.argmax.clone().unwrap_or_default(),
                top.join(";"),
            ])?;
        }
        Ok(())
    })
}
