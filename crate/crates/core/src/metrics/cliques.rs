//! Maximal-clique size histogram via Bron–Kerbosch with Tomita pivoting,
//! seeded by a degeneracy ordering at the top level.

use std::time::{Duration, Instant};

use super::Distribution;
use crate::error::{Error, Result};
use crate::graph::{for_each_common, intersection_count, Graph, NodeId};

struct Search<'a> {
    g: &'a Graph,
    hist: Distribution,
    deadline: Option<Instant>,
    calls: u64,
    expired: bool,
}

fn intersect(a: &[NodeId], b: &[NodeId]) -> Vec<NodeId> {
    let mut out = Vec::new();
    for_each_common(a, b, |w| out.push(w));
    out
}

impl Search<'_> {
    fn expired(&mut self) -> bool {
        self.calls += 1;
        if !self.expired && self.calls.is_multiple_of(1024) {
            if let Some(d) = self.deadline {
                self.expired = Instant::now() >= d;
            }
        }
        self.expired
    }

    fn extend(&mut self, depth: usize, mut p: Vec<NodeId>, mut x: Vec<NodeId>) {
        if self.expired() {
            return;
        }
        if p.is_empty() {
            if x.is_empty() {
                *self.hist.entry(depth).or_insert(0.0) += 1.0;
            }
            return;
        }
        let g = self.g;
        let pivot = p
            .iter()
            .chain(x.iter())
            .copied()
            .max_by_key(|&u| intersection_count(&p, g.neighbors(u)))
            .unwrap();
        let branch: Vec<NodeId> = p
            .iter()
            .copied()
            .filter(|&v| g.neighbors(pivot).binary_search(&v).is_err())
            .collect();
        for v in branch {
            let nv = g.neighbors(v);
            self.extend(depth + 1, intersect(&p, nv), intersect(&x, nv));
            if self.expired {
                return;
            }
            let i = p.binary_search(&v).unwrap();
            p.remove(i);
            let j = x.binary_search(&v).unwrap_err();
            x.insert(j, v);
        }
    }
}

/// Smallest-last (degeneracy) order.
fn degeneracy_order(g: &Graph) -> Vec<NodeId> {
    let n = g.node_count();
    let mut deg: Vec<usize> = g.degrees();
    let max = deg.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<Vec<NodeId>> = vec![Vec::new(); max + 1];
    for v in 0..n {
        buckets[deg[v]].push(v);
    }
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut lo = 0;
    while order.len() < n {
        lo = lo.min(max);
        while buckets[lo].is_empty() {
            lo += 1;
        }
        let v = buckets[lo].pop().unwrap();
        // Stale entries: the node moved to a lower bucket or is done.
        if done[v] || deg[v] != lo {
            continue;
        }
        done[v] = true;
        order.push(v);
        for &w in g.neighbors(v) {
            if !done[w] {
                deg[w] -= 1;
                buckets[deg[w]].push(w);
                lo = lo.min(deg[w]);
            }
        }
    }
    order
}

/// Histogram of maximal-clique sizes and whether enumeration finished before
/// `timeout`. Isolated nodes count as cliques of size 1.
pub fn maximal_cliques_partial(g: &Graph, timeout: Option<Duration>) -> (Distribution, bool) {
    let mut s = Search {
        g,
        hist: Distribution::new(),
        deadline: timeout.map(|t| Instant::now() + t),
        calls: 0,
        expired: false,
    };
    let order = degeneracy_order(g);
    let mut rank = vec![0usize; g.node_count()];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    for &v in &order {
        let (p, x): (Vec<NodeId>, Vec<NodeId>) = g.neighbors(v).iter().partition(|&&w| rank[w] > rank[v]);
        s.extend(1, p, x);
        if s.expired {
            break;
        }
    }
    (s.hist, !s.expired)
}

/// Histogram of maximal-clique sizes; a timeout is an error.
pub fn maximal_cliques(g: &Graph, timeout: Option<Duration>) -> Result<Distribution> {
    let start = Instant::now();
    let (h, done) = maximal_cliques_partial(g, timeout);
    if done {
        Ok(h)
    } else {
        Err(Error::Timeout {
            metric: "maximal cliques",
            elapsed_ms: start.elapsed().as_millis(),
        })
    }
}
