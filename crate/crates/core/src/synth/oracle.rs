//! Brute-force reference implementations and recovery metrics.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::netmap::FollowGraph;
use crate::{Error, Result};

/// Largest graph the path-enumeration oracle accepts.
pub const ORACLE_MAX_NODES: usize = 10;

fn all_shortest_paths(graph: &FollowGraph, s: usize, t: usize) -> Vec<Vec<usize>> {
    let n = graph.len();
    let mut dist = vec![usize::MAX; n];
    dist[t] = 0;
    let mut queue = VecDeque::from([t]);
    while let Some(v) = queue.pop_front() {
        for &w in graph.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    if dist[s] == usize::MAX {
        return Vec::new();
    }
    // walk from s, always stepping one closer to t
    let mut paths = Vec::new();
    let mut stack = vec![vec![s]];
    while let Some(path) = stack.pop() {
        let v = *path.last().expect("non-empty");
        if v == t {
            paths.push(path);
            continue;
        }
        for &w in graph.neighbors(v) {
            if dist[w] + 1 == dist[v] {
                let mut next = path.clone();
                next.push(w);
                stack.push(next);
            }
        }
    }
    paths
}

/// Betweenness by enumerating every shortest path of every pair.
pub fn oracle_betweenness(graph: &FollowGraph) -> Result<Vec<f64>> {
    let n = graph.len();
    if n > ORACLE_MAX_NODES {
        return Err(Error::contract(format!(
            "oracle refuses {n} nodes (limit {ORACLE_MAX_NODES})"
        )));
    }
    let mut score = vec![0.0; n];
    if n < 3 {
        return Ok(score);
    }
    for s in 0..n {
        for t in s + 1..n {
            let paths = all_shortest_paths(graph, s, t);
            if paths.is_empty() {
                continue;
            }
            let share = 1.0 / paths.len() as f64;
            for p in &paths {
                for &v in &p[1..p.len() - 1] {
                    score[v] += share;
                }
            }
        }
    }
    let norm = ((n - 1) * (n - 2)) as f64 / 2.0;
    Ok(score.into_iter().map(|x| x / norm).collect())
}

/// Core numbers by computing each k-core directly on an adjacency matrix.
pub fn oracle_kcore(graph: &FollowGraph) -> Vec<u32> {
    let n = graph.len();
    let mut adj = vec![vec![false; n]; n];
    for (a, b) in graph.undirected_edges() {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    let mut core = vec![0u32; n];
    let mut k = 1u32;
    loop {
        let mut alive = vec![true; n];
        loop {
            let doomed: Vec<usize> = (0..n)
                .filter(|&v| {
                    alive[v] && (0..n).filter(|&u| alive[u] && adj[v][u]).count() < k as usize
                })
                .collect();
            if doomed.is_empty() {
                break;
            }
            for v in doomed {
                alive[v] = false;
            }
        }
        if !alive.contains(&true) {
            return core;
        }
        for v in (0..n).filter(|&v| alive[v]) {
            core[v] = k;
        }
        k += 1;
    }
}

fn choose2(x: usize) -> f64 {
    (x * x.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand index by pair counting.
pub fn ari(a: &BTreeMap<String, usize>, b: &BTreeMap<String, usize>) -> Result<f64> {
    if a.len() != b.len() || a.keys().zip(b.keys()).any(|(x, y)| x != y) {
        return Err(Error::contract("partitions cover different node sets"));
    }
    let mut table: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut rows: BTreeMap<usize, usize> = BTreeMap::new();
    let mut cols: BTreeMap<usize, usize> = BTreeMap::new();
    for (id, &x) in a {
        let y = b[id];
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| choose2(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| choose2(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| choose2(c)).sum();
    let expected = sum_a * sum_b / choose2(a.len()).max(1.0);
    let max = (sum_a + sum_b) / 2.0;
    if max == expected {
        return Ok(if index == max { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopicMatch {
    pub planted: usize,
    pub fitted: usize,
    pub distance: f64,
}

/// Greedy one-to-one matching by total-variation distance, closest pairs
/// first. Rows must share a column order.
pub fn match_topics(planted: &[Vec<f64>], fitted: &[Vec<f64>]) -> Vec<TopicMatch> {
    let mut pairs: Vec<TopicMatch> = planted
        .iter()
        .enumerate()
        .flat_map(|(i, p)| {
            fitted.iter().enumerate().map(move |(j, f)| TopicMatch {
                planted: i,
                fitted: j,
                distance: total_variation(p, f),
            })
        })
        .collect();
    pairs.sort_by(|x, y| {
        x.distance
            .total_cmp(&y.distance)
            .then((x.planted, x.fitted).cmp(&(y.planted, y.fitted)))
    });
    let (mut used_p, mut used_f) = (BTreeSet::new(), BTreeSet::new());
    let mut out = Vec::new();
    for m in pairs {
        if !used_p.contains(&m.planted) && !used_f.contains(&m.fitted) {
            used_p.insert(m.planted);
            used_f.insert(m.fitted);
            out.push(m);
        }
    }
    out.sort_by_key(|m| m.planted);
    out
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties; 0 when either
/// side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "spearman needs equal lengths");
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// `H(m) - (H(p) + H(q)) / 2` in bits.
pub fn entropy_jsd(p: &[f64], q: &[f64]) -> f64 {
    let h = |d: &mut dyn Iterator<Item = f64>| -> f64 {
        d.filter(|&x| x > 0.0).map(|x| -x * x.log2()).sum()
    };
    let hm = h(&mut p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)));
    let hp = h(&mut p.iter().copied());
    let hq = h(&mut q.iter().copied());
    hm - 0.5 * (hp + hq)
}
