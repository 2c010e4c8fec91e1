//! Average-linkage agglomerative clustering on cosine distance between
//! follow sets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::FollowGraph;
use crate::{Error, Result};

/// Cosine similarity of the sets of accounts `u` and `v` follow; 0 when
/// either follows nobody.
pub fn follow_similarity(graph: &FollowGraph, u: usize, v: usize) -> f64 {
    let (a, b) = (graph.following(u), graph.following(v));
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let (mut i, mut j, mut shared) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    if shared == a.len() && shared == b.len() {
        return 1.0;
    }
    shared as f64 / ((a.len() * b.len()) as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterTarget {
    /// Merge until this many clusters remain.
    Count(usize),
    /// Merge while the closest pair is nearer than this distance. Pairs with
    /// no shared following at all (distance 1) are never merged.
    Threshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    /// Smallest node index of each merged cluster.
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterLabel {
    pub label: String,
    pub group: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    /// Cluster id per graph node; ids are numbered by smallest member.
    pub cluster_of: Vec<usize>,
    pub n_clusters: usize,
    pub dendrogram: Vec<Merge>,
    pub labels: BTreeMap<usize, ClusterLabel>,
}

impl ClusterAssignment {
    pub fn empty() -> Self {
        ClusterAssignment {
            cluster_of: Vec::new(),
            n_clusters: 0,
            dendrogram: Vec::new(),
            labels: BTreeMap::new(),
        }
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.cluster_of.len())
            .filter(|&v| self.cluster_of[v] == cluster)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters];
        for &c in &self.cluster_of {
            sizes[c] += 1;
        }
        sizes
    }
}

/// Lance-Williams state: upper-triangular distances between active slots,
/// where a slot's index is its cluster's smallest member.
struct Linkage {
    n: usize,
    dist: Vec<f64>,
    size: Vec<usize>,
    active: Vec<bool>,
    /// Nearest active slot j > i and its distance, per row.
    nearest: Vec<Option<(f64, usize)>>,
}

impl Linkage {
    fn new(graph: &FollowGraph) -> Self {
        let n = graph.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = 1.0 - follow_similarity(graph, i, j);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        let mut link = Linkage {
            n,
            dist,
            size: vec![1; n],
            active: vec![true; n],
            nearest: vec![None; n],
        };
        for i in 0..n {
            link.refresh_row(i);
        }
        link
    }

    fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    fn refresh_row(&mut self, i: usize) {
        let mut best: Option<(f64, usize)> = None;
        for j in i + 1..self.n {
            if self.active[j] && best.is_none_or(|(d, _)| self.d(i, j) < d) {
                best = Some((self.d(i, j), j));
            }
        }
        self.nearest[i] = best;
    }

    /// Closest active pair, ties broken by smallest (left, right) slot.
    fn closest(&self) -> Option<(f64, usize, usize)> {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..self.n {
            if !self.active[i] {
                continue;
            }
            if let Some((d, j)) = self.nearest[i] {
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, i, j));
                }
            }
        }
        best
    }

    /// Merges slot `b` into slot `a` (a < b).
    fn merge(&mut self, a: usize, b: usize) {
        let (sa, sb) = (self.size[a] as f64, self.size[b] as f64);
        self.active[b] = false;
        for k in 0..self.n {
            if !self.active[k] || k == a {
                continue;
            }
            let d = (sa * self.d(a, k) + sb * self.d(b, k)) / (sa + sb);
            self.dist[a * self.n + k] = d;
            self.dist[k * self.n + a] = d;
        }
        self.size[a] += self.size[b];
        self.refresh_row(a);
        for i in 0..a {
            if !self.active[i] {
                continue;
            }
            match self.nearest[i] {
                Some((_, j)) if j == a || j == b => self.refresh_row(i),
                Some((d, j)) => {
                    let da = self.d(i, a);
                    if da < d || (da == d && a < j) {
                        self.nearest[i] = Some((da, a));
                    }
                }
                None => self.refresh_row(i),
            }
        }
        for i in a + 1..b {
            if self.active[i] && matches!(self.nearest[i], Some((_, j)) if j == b) {
                self.refresh_row(i);
            }
        }
    }

    fn active_slots(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.active[i]).collect()
    }

    fn between(&self, i: usize, j: usize) -> f64 {
        if i < j {
            self.d(i, j)
        } else {
            self.d(j, i)
        }
    }
}

/// Clusters graph nodes by shared following.
///
/// Clusters smaller than `min_cluster_size` are folded, smallest first, into
/// the cluster at least average distance, so the result stays a partition.
pub fn agglomerative_cluster(
    graph: &FollowGraph,
    target: ClusterTarget,
    min_cluster_size: usize,
) -> Result<ClusterAssignment> {
    let n = graph.len();
    if n == 0 {
        return Err(Error::Empty("cannot cluster an empty graph".into()));
    }
    match target {
        ClusterTarget::Count(0) => {
            return Err(Error::config("target cluster count must be at least 1"))
        }
        ClusterTarget::Count(t) if t > n => {
            return Err(Error::config(format!(
                "target of {t} clusters exceeds {n} nodes"
            )))
        }
        ClusterTarget::Threshold(h) if !(h >= 0.0) => {
            return Err(Error::config("distance threshold must be nonnegative"))
        }
        _ => {}
    }

    let mut link = Linkage::new(graph);
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut dendrogram = Vec::new();
    let mut remaining = n;
    while let Some((d, a, b)) = link.closest() {
        let proceed = match target {
            ClusterTarget::Count(t) => remaining > t,
            ClusterTarget::Threshold(h) => d < h && d < 1.0,
        };
        if !proceed {
            break;
        }
        link.merge(a, b);
        let moved = std::mem::take(&mut members[b]);
        members[a].extend(moved);
        dendrogram.push(Merge {
            left: a,
            right: b,
            height: d,
            size: members[a].len(),
        });
        remaining -= 1;
    }

    loop {
        let slots = link.active_slots();
        if slots.len() < 2 {
            break;
        }
        let Some(&small) = slots
            .iter()
            .filter(|&&s| link.size[s] < min_cluster_size)
            .min_by_key(|&&s| (link.size[s], s))
        else {
            break;
        };
        let &into = slots
            .iter()
            .filter(|&&s| s != small)
            .min_by(|&&x, &&y| {
                link.between(small, x)
                    .total_cmp(&link.between(small, y))
                    .then(x.cmp(&y))
            })
            .expect("at least two clusters");
        let (a, b) = (small.min(into), small.max(into));
        link.merge(a, b);
        let moved = std::mem::take(&mut members[b]);
        members[a].extend(moved);
    }

    let mut cluster_of = vec![0; n];
    let slots = link.active_slots();
    for (id, &slot) in slots.iter().enumerate() {
        for &v in &members[slot] {
            cluster_of[v] = id;
        }
    }
    Ok(ClusterAssignment {
        cluster_of,
        n_clusters: slots.len(),
        dendrogram,
        labels: BTreeMap::new(),
    })
}
