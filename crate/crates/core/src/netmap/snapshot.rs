//! Monthly map snapshots: seed-active accounts, pruned follow graph,
//! clusters and their shares.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::Serialize;

use super::graph::csv_error;
use super::{
    agglomerative_cluster, build_follow_graph, cluster_share, density_ratio, ei_index, fr_layout,
    prune_kcore, ClusterAssignment, ClusterLabel, ClusterTarget, FollowGraph, Point,
};
use crate::ingest::{select_accounts, tweets_in_range, SeedConfig, Tweet};
use crate::{Error, Result};

pub type LabelMap = BTreeMap<usize, ClusterLabel>;

#[derive(Debug, Clone, PartialEq)]
pub struct Month {
    pub label: String,
    pub range: (DateTime<Utc>, DateTime<Utc>),
    pub activity_threshold: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapParams {
    pub seeds: BTreeSet<String>,
    pub kcore_k: u32,
    pub target: ClusterTarget,
    pub min_cluster_size: usize,
    pub layout_iterations: usize,
    pub rng_seed: u64,
}

#[derive(Debug, Clone)]
pub struct MapSnapshot {
    pub month: String,
    /// Seed-active accounts before k-core pruning.
    pub members: BTreeSet<String>,
    pub graph: FollowGraph,
    pub assignment: ClusterAssignment,
    pub shares: Vec<f64>,
    pub layout: Option<Vec<Point>>,
    pub warnings: Vec<String>,
}

impl MapSnapshot {
    fn empty(month: &str, members: BTreeSet<String>, warning: String) -> Self {
        log::warn!("{month}: {warning}");
        MapSnapshot {
            month: month.to_string(),
            members,
            graph: FollowGraph::new(Vec::<&str>::new(), &[]),
            assignment: ClusterAssignment::empty(),
            shares: Vec::new(),
            layout: None,
            warnings: vec![warning],
        }
    }

    pub fn cluster_nodes(&self, cluster: usize) -> BTreeSet<usize> {
        self.assignment.members(cluster).into_iter().collect()
    }

    pub fn cluster_of_account(&self, account: &str) -> Option<usize> {
        self.graph
            .index_of(account)
            .and_then(|v| self.assignment.cluster_of.get(v).copied())
    }
}

pub fn build_snapshot(
    month: &Month,
    tweets: &[Tweet],
    edges: &[(String, String)],
    params: &MapParams,
    labels: Option<&LabelMap>,
) -> Result<MapSnapshot> {
    let seeds = SeedConfig {
        seed_hashtags: params.seeds.clone(),
        activity_threshold: month.activity_threshold,
        date_range: month.range,
    };
    let in_month = tweets_in_range(tweets, month.range);
    let members = select_accounts(&in_month, &seeds)?;
    if members.is_empty() {
        return Ok(MapSnapshot::empty(
            &month.label,
            members,
            "no seed-active accounts".into(),
        ));
    }
    let graph = prune_kcore(&build_follow_graph(edges, &members), params.kcore_k);
    if graph.is_empty() {
        let warning = format!(
            "no accounts survive k-core pruning at k = {}",
            params.kcore_k
        );
        return Ok(MapSnapshot::empty(&month.label, members, warning));
    }
    let mut warnings = Vec::new();
    let target = match params.target {
        ClusterTarget::Count(t) if t > graph.len() => {
            let w = format!("cluster target {t} reduced to {} nodes", graph.len());
            log::warn!("{}: {w}", month.label);
            warnings.push(w);
            ClusterTarget::Count(graph.len())
        }
        t => t,
    };
    let mut assignment = agglomerative_cluster(&graph, target, params.min_cluster_size)?;
    if let Some(labels) = labels {
        assignment.labels = labels
            .iter()
            .filter(|(&id, _)| id < assignment.n_clusters)
            .map(|(&id, l)| (id, l.clone()))
            .collect();
    }
    let shares = cluster_share(&assignment)?;
    let layout = Some(fr_layout(&graph, params.layout_iterations, params.rng_seed));
    Ok(MapSnapshot {
        month: month.label.clone(),
        members,
        graph,
        assignment,
        shares,
        layout,
        warnings,
    })
}

/// Reads `labels.csv` (`cluster_id,label,group`).
pub fn read_labels(path: &Path) -> Result<LabelMap> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["cluster_id", "label", "group"] {
        return Err(Error::Parse {
            line: 1,
            message: format!("{}: expected header cluster_id,label,group", path.display()),
        });
    }
    let mut labels = LabelMap::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let id = rec[0].trim().parse::<usize>().map_err(|e| Error::Parse {
            line: i + 2,
            message: format!("{}: bad cluster_id: {e}", path.display()),
        })?;
        labels.insert(
            id,
            ClusterLabel {
                label: rec[1].to_string(),
                group: rec[2].to_string(),
            },
        );
    }
    Ok(labels)
}

#[derive(Serialize)]
struct ClustersFile<'a> {
    month: &'a str,
    clusters: Vec<ClusterRecord<'a>>,
}

#[derive(Serialize)]
struct ClusterRecord<'a> {
    id: usize,
    label: Option<&'a str>,
    group: Option<&'a str>,
    members: Vec<&'a str>,
    share: f64,
    ei_index: f64,
    density_ratio: Option<f64>,
}

/// Renders `clusters.json`; `density_ratio` is null where undefined.
pub fn clusters_json(snapshot: &MapSnapshot) -> String {
    let clusters = (0..snapshot.assignment.n_clusters)
        .map(|c| {
            let nodes = snapshot.cluster_nodes(c);
            let label = snapshot.assignment.labels.get(&c);
            ClusterRecord {
                id: c,
                label: label.map(|l| l.label.as_str()),
                group: label.map(|l| l.group.as_str()),
                members: nodes.iter().map(|&v| snapshot.graph.id(v)).collect(),
                share: snapshot.shares[c],
                ei_index: ei_index(&snapshot.graph, &nodes).expect("non-empty cluster"),
                density_ratio: density_ratio(&snapshot.graph, &nodes).ok(),
            }
        })
        .collect();
    let file = ClustersFile {
        month: &snapshot.month,
        clusters,
    };
    let mut s = serde_json::to_string_pretty(&file).expect("serializable");
    s.push('\n');
    s
}
