//! Cluster shares and heterophily measures on the undirected projection.

use std::collections::BTreeSet;

use super::{ClusterAssignment, FollowGraph};
use crate::{Error, Result};

/// Fraction of mapped accounts in each cluster, indexed by cluster id.
pub fn cluster_share(assignment: &ClusterAssignment) -> Result<Vec<f64>> {
    let total = assignment.cluster_of.len();
    if total == 0 {
        return Err(Error::Empty("cluster assignment is empty".into()));
    }
    Ok(assignment
        .sizes()
        .into_iter()
        .map(|s| s as f64 / total as f64)
        .collect())
}

/// Formats a share as a percentage with one decimal, e.g. `15.9%`.
pub fn format_share(share: f64) -> String {
    format!("{:.1}%", share * 100.0)
}

fn edge_split(graph: &FollowGraph, cluster: &BTreeSet<usize>) -> (usize, usize) {
    let (mut internal, mut external) = (0, 0);
    for (a, b) in graph.undirected_edges() {
        match (cluster.contains(&a), cluster.contains(&b)) {
            (true, true) => internal += 1,
            (true, false) | (false, true) => external += 1,
            _ => {}
        }
    }
    (internal, external)
}

/// E-I index `(E - I) / (E + I)`: -1 fully inward, +1 fully outward, 0 when
/// the cluster touches no edge.
pub fn ei_index(graph: &FollowGraph, cluster: &BTreeSet<usize>) -> Result<f64> {
    if cluster.is_empty() {
        return Err(Error::contract("E-I index of an empty cluster"));
    }
    let (internal, external) = edge_split(graph, cluster);
    if internal + external == 0 {
        return Ok(0.0);
    }
    Ok((external as f64 - internal as f64) / (external + internal) as f64)
}

fn pair_count(n: usize) -> f64 {
    (n * n.saturating_sub(1)) as f64 / 2.0
}

/// Internal edge density of the cluster relative to the whole graph's.
pub fn density_ratio(graph: &FollowGraph, cluster: &BTreeSet<usize>) -> Result<f64> {
    if cluster.len() < 2 {
        return Err(Error::contract("density ratio needs at least two members"));
    }
    let overall = graph.undirected_edge_count() as f64 / pair_count(graph.len());
    if overall == 0.0 {
        return Err(Error::contract(
            "graph density is zero; density ratio undefined",
        ));
    }
    let (internal, _) = edge_split(graph, cluster);
    Ok(internal as f64 / pair_count(cluster.len()) / overall)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn assignment(cluster_of: Vec<usize>) -> ClusterAssignment {
        let n_clusters = cluster_of.iter().max().map_or(0, |m| m + 1);
        ClusterAssignment {
            cluster_of,
            n_clusters,
            dendrogram: vec![],
            labels: BTreeMap::new(),
        }
    }

    fn set(g: &FollowGraph, ids: &[&str]) -> BTreeSet<usize> {
        ids.iter().map(|s| g.index_of(s).unwrap()).collect()
    }

    #[test]
    fn shares() {
        assert_eq!(
            cluster_share(&assignment(vec![0, 0, 1, 0])).unwrap(),
            vec![0.75, 0.25]
        );
        assert_eq!(cluster_share(&assignment(vec![0, 0])).unwrap(), vec![1.0]);
        assert!(cluster_share(&ClusterAssignment::empty()).is_err());
        assert_eq!(format_share(0.159), "15.9%");
        assert_eq!(format_share(0.226), "22.6%");
    }

    #[test]
    fn ei_examples() {
        let g = FollowGraph::from_edges(&[
            ("a", "b"),
            ("b", "c"),
            ("c", "d"),
            ("d", "a"),
            ("a", "x"),
            ("x", "y"),
        ]);
        let c = set(&g, &["a", "b", "c", "d"]);
        assert!((ei_index(&g, &c).unwrap() - -0.6).abs() < 1e-12);
        let all = set(&g, &["a", "b", "c", "d", "x", "y"]);
        assert_eq!(ei_index(&g, &all).unwrap(), -1.0);

        let star = FollowGraph::from_edges(&[("h", "l1"), ("h", "l2")]);
        assert_eq!(ei_index(&star, &set(&star, &["h"])).unwrap(), 1.0);
        let iso = FollowGraph::new(["a", "b", "q"], &[("a", "b")]);
        assert_eq!(ei_index(&iso, &set(&iso, &["q"])).unwrap(), 0.0);
        assert!(ei_index(&iso, &BTreeSet::new()).is_err());
    }

    #[test]
    fn density_examples() {
        // 10 nodes, 9 edges: a triangle, a tail through i, and isolated j
        let g = FollowGraph::new(
            ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"],
            &[
                ("a", "b"),
                ("b", "c"),
                ("c", "a"),
                ("c", "d"),
                ("d", "e"),
                ("e", "f"),
                ("f", "g"),
                ("g", "h"),
                ("h", "i"),
            ],
        );
        assert_eq!(g.len(), 10);
        assert!((g.undirected_edge_count() as f64 / 45.0 - 0.2).abs() < 1e-12);
        let tri = set(&g, &["a", "b", "c"]);
        assert!((density_ratio(&g, &tri).unwrap() - 5.0).abs() < 1e-12);

        let whole: BTreeSet<usize> = (0..g.len()).collect();
        assert!((density_ratio(&g, &whole).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(density_ratio(&g, &set(&g, &["a", "j"])).unwrap(), 0.0);

        let empty = FollowGraph::new(["a", "b"], &[]);
        assert!(density_ratio(&empty, &set(&empty, &["a", "b"])).is_err());
        assert!(density_ratio(&g, &set(&g, &["a"])).is_err());
    }

    proptest! {
        #[test]
        fn ei_invariant_under_relabeling(pairs in prop::collection::vec((0usize..8, 0usize..8), 1..20), members in prop::collection::btree_set(0usize..8, 1..5)) {
            let ids: Vec<String> = (0..8).map(|i| format!("n{i}")).collect();
            // reversed names give the reverse index order
            let renamed: Vec<String> = (0..8).map(|i| format!("n{}", 7 - i)).collect();
            let e1: Vec<(String, String)> = pairs.iter().map(|&(a, b)| (ids[a].clone(), ids[b].clone())).collect();
            let e2: Vec<(String, String)> = pairs.iter().map(|&(a, b)| (renamed[a].clone(), renamed[b].clone())).collect();
            let g1 = FollowGraph::new(ids.clone(), &e1);
            let g2 = FollowGraph::new(renamed.clone(), &e2);
            let m1: BTreeSet<usize> = members.iter().map(|&m| g1.index_of(&ids[m]).unwrap()).collect();
            let m2: BTreeSet<usize> = members.iter().map(|&m| g2.index_of(&renamed[m]).unwrap()).collect();
            prop_assert_eq!(ei_index(&g1, &m1).unwrap(), ei_index(&g2, &m2).unwrap());
            let ei = ei_index(&g1, &m1).unwrap();
            prop_assert!((-1.0..=1.0).contains(&ei));
        }
    }
}
