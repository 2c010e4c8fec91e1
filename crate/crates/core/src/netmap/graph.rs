use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use crate::{Error, Result};

/// Directed follow graph over a fixed node set. Nodes are indexed in
/// ascending id order; follow direction is kept for similarity, while
/// structural measures use the undirected projection.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
    und: Vec<Vec<usize>>,
}

impl FollowGraph {
    /// Builds a graph on `nodes` from index pairs; self-loops and duplicates
    /// are dropped.
    fn from_indexed(ids: Vec<String>, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let n = ids.len();
        let mut out: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (a, b) in edges {
            if a != b {
                out[a].insert(b);
            }
        }
        let mut inn = vec![Vec::new(); n];
        let mut und: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (a, targets) in out.iter().enumerate() {
            for &b in targets {
                inn[b].push(a);
                und[a].insert(b);
                und[b].insert(a);
            }
        }
        let index = ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        FollowGraph {
            ids,
            index,
            out: out.into_iter().map(|s| s.into_iter().collect()).collect(),
            inn,
            und: und.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    /// Graph on `nodes`; edges with an endpoint outside the node set are
    /// dropped.
    pub fn new<S: AsRef<str>>(nodes: impl IntoIterator<Item = S>, edges: &[(S, S)]) -> Self {
        let ids: BTreeSet<String> = nodes.into_iter().map(|s| s.as_ref().to_string()).collect();
        let ids: Vec<String> = ids.into_iter().collect();
        let index: HashMap<&str, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let pairs: Vec<(usize, usize)> = edges
            .iter()
            .filter_map(|(a, b)| Some((*index.get(a.as_ref())?, *index.get(b.as_ref())?)))
            .collect();
        Self::from_indexed(ids, pairs)
    }

    /// Undirected convenience constructor: nodes are the edge endpoints.
    pub fn from_edges(edges: &[(&str, &str)]) -> Self {
        let nodes: Vec<&str> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        Self::new(nodes, edges)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Accounts that `i` follows, ascending.
    pub fn following(&self, i: usize) -> &[usize] {
        &self.out[i]
    }

    pub fn followers(&self, i: usize) -> &[usize] {
        &self.inn[i]
    }

    /// Neighbors in the undirected projection, ascending.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.und[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.und[i].len()
    }

    pub fn directed_edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn undirected_edge_count(&self) -> usize {
        self.und.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Directed edges as id pairs, in (follower, followed) order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(move |(a, bs)| bs.iter().map(move |&b| (self.id(a), self.id(b))))
    }

    /// Undirected edges as index pairs with `a < b`.
    pub fn undirected_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.und
            .iter()
            .enumerate()
            .flat_map(|(a, bs)| bs.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
    }

    /// Induced subgraph on the nodes where `keep` is true.
    pub fn induced(&self, keep: impl Fn(usize) -> bool) -> FollowGraph {
        let kept: Vec<usize> = (0..self.len()).filter(|&i| keep(i)).collect();
        let mut remap = vec![usize::MAX; self.len()];
        for (new, &old) in kept.iter().enumerate() {
            remap[old] = new;
        }
        let ids = kept.iter().map(|&i| self.ids[i].clone()).collect();
        let edges: Vec<(usize, usize)> = kept
            .iter()
            .flat_map(|&a| self.out[a].iter().map(move |&b| (a, b)))
            .filter(|&(_, b)| remap[b] != usize::MAX)
            .map(|(a, b)| (remap[a], remap[b]))
            .collect();
        Self::from_indexed(ids, edges)
    }

    /// Connected components of the undirected projection, each sorted, in
    /// order of smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut comps = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &w in &self.und[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }
}

/// Keeps edges with both endpoints in `restrict_to`; the node set is exactly
/// `restrict_to`.
pub fn build_follow_graph(
    edges: &[(String, String)],
    restrict_to: &BTreeSet<String>,
) -> FollowGraph {
    FollowGraph::new(restrict_to.iter().map(String::as_str), &to_str_pairs(edges))
}

fn to_str_pairs(edges: &[(String, String)]) -> Vec<(&str, &str)> {
    edges
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect()
}

/// Reads `follows.csv` (`follower_id,followed_id`).
pub fn read_follows(path: &Path) -> Result<Vec<(String, String)>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["follower_id", "followed_id"] {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "{}: expected header follower_id,followed_id",
                path.display()
            ),
        });
    }
    let mut edges = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        if rec.len() != 2 || rec[0].is_empty() || rec[1].is_empty() {
            return Err(Error::Parse {
                line: i + 2,
                message: format!("{}: expected two non-empty fields", path.display()),
            });
        }
        edges.push((rec[0].to_string(), rec[1].to_string()));
    }
    Ok(edges)
}

pub fn follows_csv(edges: &[(String, String)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["follower_id", "followed_id"])
        .expect("in-memory write");
    for (a, b) in edges {
        w.write_record([a, b]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        kind => Error::Parse {
            line,
            message: format!("{}: {kind:?}", path.display()),
        },
    }
}
