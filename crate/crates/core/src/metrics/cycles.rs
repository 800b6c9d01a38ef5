//! Length histogram of a minimum cycle basis.
//!
//! Horton's candidate set — for every vertex `v` and edge `(x, y)`, the
//! cycle `P(v,x) + (x,y) + P(y,v)` built from a shortest-path tree at `v` —
//! contains a minimum basis, which the greedy algorithm extracts by taking
//! candidates in length order and keeping those independent over GF(2).
//!
//! Candidates are generated in batches of increasing length so that the
//! search stops as soon as the basis is complete; most graphs of interest
//! are filled by short cycles long before the long candidates are needed.

use std::collections::{HashSet, VecDeque};
use std::time::{Duration, Instant};

use super::Distribution;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

#[derive(Debug, Clone, Copy)]
pub struct CycleBasisOptions {
    /// Distinct candidates allowed before the metric is skipped.
    pub candidate_bound: usize,
    pub timeout: Option<Duration>,
}

impl Default for CycleBasisOptions {
    fn default() -> Self {
        CycleBasisOptions {
            candidate_bound: 200_000,
            timeout: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CycleBasisOutcome {
    /// Basis-cycle count per length.
    Complete(Distribution),
    /// The candidate bound was reached.
    Skipped { candidates: usize },
}

/// GF(2) row echelon form with rows indexed by their lowest set bit.
struct Echelon {
    rows: Vec<Option<Vec<u64>>>,
    rank: usize,
}

impl Echelon {
    fn new(bits: usize) -> Self {
        Echelon {
            rows: vec![None; bits],
            rank: 0,
        }
    }

    /// Inserts `v` if it is independent of the rows so far.
    fn insert(&mut self, mut v: Vec<u64>) -> bool {
        let mut w = 0;
        loop {
            while w < v.len() && v[w] == 0 {
                w += 1;
            }
            if w == v.len() {
                return false;
            }
            let p = w * 64 + v[w].trailing_zeros() as usize;
            match &self.rows[p] {
                // Row `p` has no bits below `p`, so the lowest set bit only
                // moves up.
                Some(row) => {
                    for (a, b) in v[w..].iter_mut().zip(&row[w..]) {
                        *a ^= b;
                    }
                }
                None => {
                    self.rows[p] = Some(v);
                    self.rank += 1;
                    return true;
                }
            }
        }
    }
}

struct Tree {
    dist: Vec<u32>,
    parent: Vec<NodeId>,
    branch: Vec<NodeId>,
    seen: Vec<NodeId>,
}

impl Tree {
    fn new(n: usize) -> Self {
        Tree {
            dist: vec![u32::MAX; n],
            parent: vec![usize::MAX; n],
            branch: vec![usize::MAX; n],
            seen: Vec::new(),
        }
    }

    /// BFS tree at `root` truncated at `radius` hops.
    fn grow(&mut self, g: &Graph, root: NodeId, radius: u32) {
        for &u in &self.seen {
            self.dist[u] = u32::MAX;
        }
        self.seen.clear();
        self.dist[root] = 0;
        self.branch[root] = root;
        self.seen.push(root);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            if self.dist[u] == radius {
                continue;
            }
            for &w in g.neighbors(u) {
                if self.dist[w] == u32::MAX {
                    self.dist[w] = self.dist[u] + 1;
                    self.parent[w] = u;
                    self.branch[w] = if u == root { w } else { self.branch[u] };
                    self.seen.push(w);
                    queue.push_back(w);
                }
            }
        }
    }
}

fn edge_index(g: &Graph) -> Vec<Vec<usize>> {
    let mut ids: Vec<Vec<usize>> = (0..g.node_count()).map(|v| vec![0; g.degree(v)]).collect();
    for (i, (u, v)) in g.edges().enumerate() {
        let a = g.neighbors(u).binary_search(&v).unwrap();
        let b = g.neighbors(v).binary_search(&u).unwrap();
        ids[u][a] = i;
        ids[v][b] = i;
    }
    ids
}

/// Minimum cycle basis length histogram. The basis has
/// `|E| − |V| + components` cycles; a forest gives an empty histogram.
pub fn cycle_basis_distribution(g: &Graph, opts: &CycleBasisOptions) -> Result<CycleBasisOutcome> {
    let start = Instant::now();
    let n = g.node_count();
    let m = g.edge_count();
    let target = m + g.components().1 - n;
    let mut hist = Distribution::new();
    if target == 0 {
        return Ok(CycleBasisOutcome::Complete(hist));
    }
    let ids = edge_index(g);
    let eid = |u: NodeId, v: NodeId| ids[u][g.neighbors(u).binary_search(&v).unwrap()];
    let words = m.div_ceil(64);
    let mut basis = Echelon::new(m);
    let mut tree = Tree::new(n);
    let mut candidates = 0usize;
    let (mut lo, mut hi) = (2usize, 3usize);
    while basis.rank < target {
        // Cycles of length L need tree depth at most L / 2.
        let radius = (hi / 2) as u32;
        let mut batch: HashSet<Vec<usize>> = HashSet::new();
        for root in 0..n {
            if let Some(t) = opts.timeout {
                if start.elapsed() > t {
                    return Err(Error::Timeout {
                        metric: "cycle basis",
                        elapsed_ms: start.elapsed().as_millis(),
                    });
                }
            }
            tree.grow(g, root, radius);
            for &x in &tree.seen {
                for &y in g.neighbors(x) {
                    if y < x || tree.dist[y] == u32::MAX || x == root || y == root {
                        continue;
                    }
                    let len = (tree.dist[x] + tree.dist[y] + 1) as usize;
                    // Distinct branches: the two tree paths meet only at the root.
                    if len <= lo || len > hi || tree.branch[x] == tree.branch[y] {
                        continue;
                    }
                    let mut cyc = Vec::with_capacity(len);
                    cyc.push(eid(x, y));
                    for mut u in [x, y] {
                        while u != root {
                            let p = tree.parent[u];
                            cyc.push(eid(p, u));
                            u = p;
                        }
                    }
                    cyc.sort_unstable();
                    batch.insert(cyc);
                }
            }
            if candidates + batch.len() > opts.candidate_bound {
                return Ok(CycleBasisOutcome::Skipped {
                    candidates: candidates + batch.len(),
                });
            }
        }
        candidates += batch.len();
        let mut batch: Vec<Vec<usize>> = batch.into_iter().collect();
        batch.sort_unstable_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        for cyc in batch {
            let mut bits = vec![0u64; words];
            for &e in &cyc {
                bits[e / 64] |= 1 << (e % 64);
            }
            if basis.insert(bits) {
                *hist.entry(cyc.len()).or_insert(0.0) += 1.0;
                if basis.rank == target {
                    break;
                }
            }
        }
        lo = hi;
        hi += 1;
    }
    Ok(CycleBasisOutcome::Complete(hist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named::*;

    fn basis(g: &Graph) -> Distribution {
        match cycle_basis_distribution(g, &CycleBasisOptions::default()).unwrap() {
            CycleBasisOutcome::Complete(h) => h,
            other => panic!("{other:?}"),
        }
    }

    fn d(pairs: &[(usize, f64)]) -> Distribution {
        pairs.iter().copied().collect()
    }

    #[test]
    fn examples() {
        assert_eq!(basis(&cycle(4)), d(&[(4, 1.0)]));
        assert_eq!(basis(&complete(4)), d(&[(3, 3.0)]));
        assert!(basis(&path(7)).is_empty());
        assert_eq!(basis(&diamond()), d(&[(3, 2.0)]));
        assert_eq!(basis(&cycle(41)), d(&[(41, 1.0)]));
    }

    #[test]
    fn cardinality_and_disconnected() {
        // Two disjoint squares joined to nothing, plus an isolated node.
        let g = Graph::from_edges(9, [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4)]);
        assert_eq!(basis(&g), d(&[(4, 2.0)]));
        let h = crate::synth::holme_kim(300, 3, 0.6, 4);
        let total: f64 = basis(&h).values().sum();
        assert_eq!(total as usize, h.edge_count() - h.node_count() + 1);
    }

    #[test]
    fn prism_prefers_short_cycles() {
        // Triangular prism: two triangles and three squares, rank 4.
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4), (2, 5)]);
        assert_eq!(basis(&g), d(&[(3, 2.0), (4, 2.0)]));
    }

    #[test]
    fn bound_skips() {
        let g = complete(12);
        let opts = CycleBasisOptions {
            candidate_bound: 10,
            timeout: None,
        };
        assert!(matches!(
            cycle_basis_distribution(&g, &opts).unwrap(),
            CycleBasisOutcome::Skipped { .. }
        ));
    }
}
