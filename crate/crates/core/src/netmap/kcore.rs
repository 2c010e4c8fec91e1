//! Core numbers by bucket peeling on the undirected projection.

use super::FollowGraph;

/// Core number per node, indexed like the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreNumbers(pub Vec<u32>);

impl CoreNumbers {
    pub fn get(&self, node: usize) -> u32 {
        self.0[node]
    }

    pub fn max(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

/// Repeatedly removes a minimum-degree node; a node's core number is the
/// largest minimum degree seen up to its removal. O(V + E) with degree
/// buckets.
pub fn kcore_numbers(graph: &FollowGraph) -> CoreNumbers {
    let n = graph.len();
    if n == 0 {
        return CoreNumbers(Vec::new());
    }
    let mut degree: Vec<usize> = (0..n).map(|v| graph.degree(v)).collect();
    let max_deg = degree.iter().copied().max().unwrap_or(0);

    // nodes sorted by degree, with bucket starts and each node's position
    let mut bin_start = vec![0usize; max_deg + 2];
    for &d in &degree {
        bin_start[d + 1] += 1;
    }
    for d in 1..bin_start.len() {
        bin_start[d] += bin_start[d - 1];
    }
    let mut order = vec![0usize; n];
    let mut pos = vec![0usize; n];
    let mut fill = bin_start.clone();
    for v in 0..n {
        pos[v] = fill[degree[v]];
        order[pos[v]] = v;
        fill[degree[v]] += 1;
    }

    for i in 0..n {
        let v = order[i];
        for &u in graph.neighbors(v) {
            if degree[u] > degree[v] {
                // move u to the front of its bucket, then shrink its degree
                let du = degree[u];
                let front = bin_start[du];
                let w = order[front];
                if w != u {
                    order.swap(pos[u], front);
                    pos[w] = pos[u];
                    pos[u] = front;
                }
                bin_start[du] += 1;
                degree[u] -= 1;
            }
        }
    }
    CoreNumbers(degree.into_iter().map(|d| d as u32).collect())
}

/// Induced subgraph on nodes with core number >= k.
pub fn prune_kcore(graph: &FollowGraph, k: u32) -> FollowGraph {
    if k == 0 {
        return graph.clone();
    }
    let cores = kcore_numbers(graph);
    let pruned = graph.induced(|v| cores.get(v) >= k);
    if pruned.is_empty() && !graph.is_empty() {
        log::warn!(
            "k = {k} exceeds the maximum core number {}; graph is empty",
            cores.max()
        );
    }
    pruned
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle_pendant() -> FollowGraph {
        FollowGraph::from_edges(&[("a", "b"), ("b", "c"), ("c", "a"), ("d", "a")])
    }

    #[test]
    fn triangle_with_pendant() {
        assert_eq!(kcore_numbers(&triangle_pendant()).0, vec![2, 2, 2, 1]);
    }

    #[test]
    fn edgeless_and_empty() {
        let g = FollowGraph::new(["a", "b", "c"], &[]);
        assert_eq!(kcore_numbers(&g).0, vec![0, 0, 0]);
        assert!(kcore_numbers(&FollowGraph::new(Vec::<&str>::new(), &[]))
            .0
            .is_empty());
    }

    #[test]
    fn complete_k4() {
        let g = FollowGraph::from_edges(&[
            ("a", "b"),
            ("a", "c"),
            ("a", "d"),
            ("b", "c"),
            ("b", "d"),
            ("c", "d"),
        ]);
        assert_eq!(kcore_numbers(&g).0, vec![3; 4]);
    }

    #[test]
    fn reciprocal_edges_count_once() {
        let g = FollowGraph::from_edges(&[("a", "b"), ("b", "a"), ("b", "c")]);
        assert_eq!(kcore_numbers(&g).0, vec![1, 1, 1]);
    }

    #[test]
    fn prune_cases() {
        let g = triangle_pendant();
        let p = prune_kcore(&g, 2);
        assert_eq!(p.ids(), ["a", "b", "c"]);
        assert_eq!(p.undirected_edge_count(), 3);
        assert_eq!(prune_kcore(&g, 0), g);
        assert!(prune_kcore(&g, 3).is_empty());
        assert_eq!(prune_kcore(&p, 2), p);
    }
}
