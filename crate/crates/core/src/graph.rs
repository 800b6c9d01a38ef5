//! Undirected simple graphs and the exact per-node / per-degree statistics
//! everything downstream is measured against.
//!
//! Adjacency is a sorted `Vec<NodeId>` per node. Neighbor intersections are
//! linear merges, which keeps [`Graph::shared_partners`] at
//! `O(deg(a) + deg(b))`.

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::jdd::{DegreeClustering, IntJdd};

pub type NodeId = usize;

/// Number of common elements of two ascending slices.
pub fn intersection_count(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Calls `f` for every common element of two ascending slices.
pub fn for_each_common(a: &[NodeId], b: &[NodeId], mut f: impl FnMut(NodeId)) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                f(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
}

/// Counts of input edges that were discarded while building a simple graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub self_loops: usize,
    pub duplicates: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<NodeId>>,
    edge_count: usize,
}

impl Graph {
    /// `n` isolated nodes.
    pub fn new(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    /// Builds a simple graph on `n` nodes, silently dropping self-loops and
    /// repeated edges. Panics if an endpoint is `>= n`.
    pub fn from_edges<I>(n: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        Self::from_edges_with_report(n, edges).0
    }

    pub fn from_edges_with_report<I>(n: usize, edges: I) -> (Self, BuildReport)
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut adj = vec![Vec::new(); n];
        let mut report = BuildReport::default();
        for (a, b) in edges {
            assert!(a < n && b < n, "edge ({a}, {b}) out of range for {n} nodes");
            if a == b {
                report.self_loops += 1;
                continue;
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut doubled = 0;
        for list in &mut adj {
            list.sort_unstable();
            let before = list.len();
            list.dedup();
            doubled += before - list.len();
        }
        report.duplicates = doubled / 2;
        let edge_count = adj.iter().map(Vec::len).sum::<usize>() / 2;
        (Graph { adj, edge_count }, report)
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn average_degree(&self) -> f64 {
        if self.adj.is_empty() {
            0.0
        } else {
            2.0 * self.edge_count as f64 / self.adj.len() as f64
        }
    }

    /// Sorted neighbor list.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        // Search the shorter list.
        let (s, t) = if self.adj[a].len() <= self.adj[b].len() {
            (a, b)
        } else {
            (b, a)
        };
        self.adj[s].binary_search(&t).is_ok()
    }

    /// Inserts `{a, b}`. Returns false (and changes nothing) for self-loops
    /// and existing edges.
    pub fn add_edge(&mut self, a: NodeId, b: NodeId) -> bool {
        if a == b {
            return false;
        }
        match self.adj[a].binary_search(&b) {
            Ok(_) => false,
            Err(pos) => {
                self.adj[a].insert(pos, b);
                let pos_b = self.adj[b].binary_search(&a).unwrap_err();
                self.adj[b].insert(pos_b, a);
                self.edge_count += 1;
                true
            }
        }
    }

    /// Removes `{a, b}` if present.
    pub fn remove_edge(&mut self, a: NodeId, b: NodeId) -> bool {
        match self.adj[a].binary_search(&b) {
            Ok(pos) => {
                self.adj[a].remove(pos);
                let pos_b = self.adj[b].binary_search(&a).expect("asymmetric adjacency");
                self.adj[b].remove(pos_b);
                self.edge_count -= 1;
                true
            }
            Err(_) => false,
        }
    }

    /// Every edge once, as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().copied().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    fn check(&self, v: NodeId) -> Result<()> {
        if v < self.adj.len() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                node: v,
                nodes: self.adj.len(),
            })
        }
    }

    /// `|N(a) ∩ N(b)|`.
    pub fn shared_partners(&self, a: NodeId, b: NodeId) -> Result<usize> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(Error::Input(format!(
                "shared partners need two distinct nodes, got {a} twice"
            )));
        }
        Ok(intersection_count(&self.adj[a], &self.adj[b]))
    }

    /// Number of triangles through `v`.
    pub fn triangles_at(&self, v: NodeId) -> usize {
        let nv = &self.adj[v];
        let twice: usize = nv
            .iter()
            .map(|&b| intersection_count(nv, &self.adj[b]))
            .sum();
        twice / 2
    }

    /// Triangle count at every node.
    pub fn triangle_counts(&self) -> Vec<usize> {
        // Each triangle is discovered once from its lowest edge orientation,
        // then credited to all three corners.
        let mut t = vec![0usize; self.adj.len()];
        for u in 0..self.adj.len() {
            let nu = &self.adj[u];
            for &v in nu.iter().filter(|&&v| v > u) {
                let nv = &self.adj[v];
                for_each_common(nu, nv, |w| {
                    if w > v {
                        t[u] += 1;
                        t[v] += 1;
                        t[w] += 1;
                    }
                });
            }
        }
        t
    }

    /// Local clustering coefficient `2 T_v / (deg(v) (deg(v) - 1))`.
    pub fn node_clustering(&self, v: NodeId) -> Result<f64> {
        self.check(v)?;
        let d = self.degree(v);
        if d < 2 {
            return Err(Error::UndefinedClustering { node: v, degree: d });
        }
        Ok(local_clustering(self.triangles_at(v), d))
    }

    /// Mean local clustering over all nodes of each degree `k >= 2`.
    pub fn degree_clustering(&self) -> DegreeClustering {
        let t = self.triangle_counts();
        let mut sums: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for (v, &tv) in t.iter().enumerate() {
            let d = self.degree(v);
            if d >= 2 {
                let e = sums.entry(d).or_insert((0.0, 0));
                e.0 += local_clustering(tv, d);
                e.1 += 1;
            }
        }
        sums.into_iter()
            .map(|(k, (s, n))| (k, s / n as f64))
            .collect()
    }

    /// Clustering averaged over all `N` nodes; nodes of degree < 2 count as 0.
    pub fn mean_clustering(&self) -> f64 {
        if self.adj.is_empty() {
            return 0.0;
        }
        let t = self.triangle_counts();
        let sum: f64 = t
            .iter()
            .enumerate()
            .filter(|(v, _)| self.degree(*v) >= 2)
            .map(|(v, &tv)| local_clustering(tv, self.degree(v)))
            .sum();
        sum / self.adj.len() as f64
    }

    /// `Σ_v T_v`, so every triangle is counted three times.
    pub fn triangle_count_total(&self) -> u64 {
        self.triangle_counts().iter().map(|&t| t as u64).sum()
    }

    /// Number of edges between every unordered degree pair.
    pub fn exact_jdd(&self) -> IntJdd {
        let mut jdd = IntJdd::new();
        for (u, v) in self.edges() {
            jdd.add(self.degree(u), self.degree(v), 1);
        }
        jdd
    }

    /// Number of nodes per degree, degree 0 included.
    pub fn degree_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for list in &self.adj {
            *h.entry(list.len()).or_insert(0) += 1;
        }
        h
    }

    /// Component label per node, labels numbered from 0 in order of first node.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let n = self.adj.len();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &w in &self.adj[u] {
                    if label[w] == usize::MAX {
                        label[w] = count;
                        queue.push_back(w);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn is_connected(&self) -> bool {
        self.components().1 <= 1
    }

    /// Induced subgraph on `nodes`, relabelled `0..nodes.len()` in the given
    /// order.
    pub fn induced_subgraph(&self, nodes: &[NodeId]) -> Graph {
        let mut index = vec![usize::MAX; self.adj.len()];
        for (i, &v) in nodes.iter().enumerate() {
            index[v] = i;
        }
        let mut adj = Vec::with_capacity(nodes.len());
        for &v in nodes {
            let mut list: Vec<NodeId> = self.adj[v]
                .iter()
                .filter_map(|&w| (index[w] != usize::MAX).then_some(index[w]))
                .collect();
            list.sort_unstable();
            adj.push(list);
        }
        let edge_count = adj.iter().map(Vec::len).sum::<usize>() / 2;
        Graph { adj, edge_count }
    }

    /// Largest connected component and the original id of each of its nodes.
    /// Ties go to the component containing the smallest node id.
    pub fn largest_component(&self) -> (Graph, Vec<NodeId>) {
        let (label, count) = self.components();
        if count <= 1 {
            return (self.clone(), (0..self.adj.len()).collect());
        }
        let mut sizes = vec![0usize; count];
        for &l in &label {
            sizes[l] += 1;
        }
        let best = (0..count).max_by_key(|&c| (sizes[c], std::cmp::Reverse(c))).unwrap();
        let nodes: Vec<NodeId> = (0..self.adj.len()).filter(|&v| label[v] == best).collect();
        (self.induced_subgraph(&nodes), nodes)
    }

    /// Checks the adjacency invariants: sorted, symmetric, loop-free, and a
    /// consistent edge count.
    pub fn validate(&self) -> Result<()> {
        let mut total = 0;
        for (v, list) in self.adj.iter().enumerate() {
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Input(format!("adjacency of {v} not strictly sorted")));
            }
            for &w in list {
                if w == v {
                    return Err(Error::Input(format!("self-loop at {v}")));
                }
                if w >= self.adj.len() || self.adj[w].binary_search(&v).is_err() {
                    return Err(Error::Input(format!("edge ({v}, {w}) not symmetric")));
                }
            }
            total += list.len();
        }
        if total != 2 * self.edge_count {
            return Err(Error::Input("edge count out of sync with adjacency".into()));
        }
        Ok(())
    }
}

/// `2 t / (d (d - 1))`; caller guarantees `d >= 2`.
pub fn local_clustering(triangles: usize, degree: usize) -> f64 {
    2.0 * triangles as f64 / (degree as f64 * (degree as f64 - 1.0))
}

/// Small named graphs used throughout the tests and examples.
pub mod named {
    use super::Graph;

    pub fn complete(n: usize) -> Graph {
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
        Graph::from_edges(n, edges)
    }

    /// Star with center 0 and `n - 1` leaves.
    pub fn star(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|v| (0, v)))
    }

    pub fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|v| (v - 1, v)))
    }

    pub fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|v| (v, (v + 1) % n)))
    }

    /// K4 without the edge {2, 3}: nodes 0 and 1 have degree 3.
    pub fn diamond() -> Graph {
        Graph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])
    }
}
