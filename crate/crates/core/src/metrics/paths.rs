//! Hop-distance histogram and closeness centrality from BFS sweeps.
//!
//! Both run on the largest connected component. With a source budget below
//! the component size, sources are drawn uniformly without replacement and
//! the result is an estimate; otherwise every node is a source and the
//! result is exact.

use std::collections::VecDeque;

use log::info;
use rand::seq::index;

use super::{normalized, workers, Distribution};
use crate::graph::{Graph, NodeId};
use crate::sampling::rng_from_seed;

/// Ordered (source, target) pair counts per hop distance.
#[derive(Debug, Clone, PartialEq)]
pub struct PathHistogram {
    pub counts: Distribution,
    pub sources: usize,
    pub exact: bool,
}

impl PathHistogram {
    pub fn pairs(&self) -> f64 {
        self.counts.values().sum()
    }

    /// Probability that an evaluated pair is at each distance.
    pub fn normalized(&self) -> Distribution {
        normalized(&self.counts)
    }
}

struct Sweep {
    hops: Vec<u64>,
    /// `(source, Σ distance)` for every source.
    sums: Vec<(NodeId, u64)>,
}

fn bfs_sweep(g: &Graph, sources: &[NodeId]) -> Sweep {
    let n = g.node_count();
    let chunk = sources.len().div_ceil(workers()).max(1);
    let parts: Vec<Sweep> = std::thread::scope(|s| {
        let handles: Vec<_> = sources
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    let mut dist = vec![u32::MAX; n];
                    let mut queue = VecDeque::new();
                    let mut hops: Vec<u64> = Vec::new();
                    let mut sums = Vec::with_capacity(part.len());
                    for &src in part {
                        dist.fill(u32::MAX);
                        dist[src] = 0;
                        queue.push_back(src);
                        let mut total = 0u64;
                        while let Some(u) = queue.pop_front() {
                            let du = dist[u];
                            if du > 0 {
                                let h = du as usize;
                                if hops.len() <= h {
                                    hops.resize(h + 1, 0);
                                }
                                hops[h] += 1;
                                total += du as u64;
                            }
                            for &w in g.neighbors(u) {
                                if dist[w] == u32::MAX {
                                    dist[w] = du + 1;
                                    queue.push_back(w);
                                }
                            }
                        }
                        sums.push((src, total));
                    }
                    Sweep { hops, sums }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("BFS worker panicked")).collect()
    });
    let mut out = Sweep {
        hops: Vec::new(),
        sums: Vec::with_capacity(sources.len()),
    };
    for p in parts {
        if out.hops.len() < p.hops.len() {
            out.hops.resize(p.hops.len(), 0);
        }
        for (h, c) in p.hops.into_iter().enumerate() {
            out.hops[h] += c;
        }
        out.sums.extend(p.sums);
    }
    out
}

fn component(g: &Graph) -> (Graph, Vec<NodeId>) {
    if g.is_connected() {
        return (g.clone(), (0..g.node_count()).collect());
    }
    let (lcc, ids) = g.largest_component();
    info!(
        "graph is disconnected; using its largest component ({} of {} nodes)",
        lcc.node_count(),
        g.node_count()
    );
    (lcc, ids)
}

fn pick_sources(n: usize, budget: usize, seed: u64) -> (Vec<NodeId>, bool) {
    if budget >= n {
        ((0..n).collect(), true)
    } else {
        let mut rng = rng_from_seed(seed);
        let mut s = index::sample(&mut rng, n, budget).into_vec();
        s.sort_unstable();
        (s, false)
    }
}

/// Hop-distance histogram from `min(source_budget, N)` BFS sources.
pub fn shortest_path_distribution(g: &Graph, source_budget: usize, seed: u64) -> PathHistogram {
    let (lcc, _) = component(g);
    let (sources, exact) = pick_sources(lcc.node_count(), source_budget, seed);
    let sweep = bfs_sweep(&lcc, &sources);
    PathHistogram {
        counts: sweep
            .hops
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(h, &c)| (h, c as f64))
            .collect(),
        sources: sources.len(),
        exact,
    }
}

/// Closeness `(n − 1) / Σ_u d(v, u)` of every evaluated node, keyed by the
/// node's id in `g`. Distances are taken inside the largest component.
pub fn closeness_centrality(g: &Graph, source_budget: usize, seed: u64) -> Vec<(NodeId, f64)> {
    let (lcc, ids) = component(g);
    let n = lcc.node_count();
    let (sources, _) = pick_sources(n, source_budget, seed);
    let mut out: Vec<(NodeId, f64)> = bfs_sweep(&lcc, &sources)
        .sums
        .into_iter()
        .map(|(v, s)| (ids[v], if s == 0 { 0.0 } else { (n - 1) as f64 / s as f64 }))
        .collect();
    out.sort_unstable_by_key(|&(v, _)| v);
    out
}

/// Fraction of evaluated nodes per closeness bin: `bins` equal-width
/// intervals over `[0, 1]`, keyed by bin index.
pub fn closeness_histogram(values: &[(NodeId, f64)], bins: usize) -> Distribution {
    let mut h = Distribution::new();
    for &(_, c) in values {
        let b = ((c * bins as f64) as usize).min(bins - 1);
        *h.entry(b).or_insert(0.0) += 1.0;
    }
    normalized(&h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named::*;

    /// Floyd–Warshall distances; `u32::MAX` for unreachable pairs.
    fn floyd(g: &Graph) -> Vec<Vec<u32>> {
        let n = g.node_count();
        let inf = u32::MAX / 2;
        let mut d = vec![vec![inf; n]; n];
        for (v, row) in d.iter_mut().enumerate() {
            row[v] = 0;
            for &w in g.neighbors(v) {
                row[w] = 1;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        d
    }

    #[test]
    fn path_and_complete() {
        let h = shortest_path_distribution(&path(3), 10, 0);
        assert!(h.exact);
        let p = h.normalized();
        assert!((p[&1] - 2.0 / 3.0).abs() < 1e-12);
        assert!((p[&2] - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(h.pairs(), 6.0);
        let k = shortest_path_distribution(&complete(6), 6, 0).normalized();
        assert_eq!(k.len(), 1);
        assert_eq!(k[&1], 1.0);
    }

    #[test]
    fn exact_matches_all_pairs() {
        for seed in 0..3 {
            let g = crate::synth::gnp(120, 0.04, seed);
            let (lcc, _) = g.largest_component();
            let d = floyd(&lcc);
            let mut want = Distribution::new();
            for row in &d {
                for &x in row {
                    if x > 0 {
                        *want.entry(x as usize).or_insert(0.0) += 1.0;
                    }
                }
            }
            assert_eq!(shortest_path_distribution(&g, usize::MAX, 0).counts, want);
        }
    }

    #[test]
    fn sampled_sources() {
        let g = crate::synth::holme_kim(400, 2, 0.5, 1);
        let h = shortest_path_distribution(&g, 50, 7);
        assert!(!h.exact);
        assert_eq!(h.sources, 50);
        assert_eq!(h.pairs(), 50.0 * 399.0);
        assert_eq!(h, shortest_path_distribution(&g, 50, 7));
    }

    #[test]
    fn closeness_examples() {
        let c = closeness_centrality(&star(5), 100, 0);
        assert_eq!(c[0], (0, 1.0));
        assert!((c[1].1 - 4.0 / 7.0).abs() < 1e-12);
        let k = closeness_centrality(&complete(5), 100, 0);
        assert!(k.iter().all(|&(_, x)| x == 1.0));
        let p = closeness_centrality(&path(5), 100, 0);
        let min = p.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
        assert_eq!(p[0].1, min);
        assert_eq!(p[4].1, min);
        assert!(p[2].1 > p[1].1);
        let h = closeness_histogram(&p, 30);
        assert!((h.values().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
