//! Synthetic test graphs.

use rand::Rng;

use crate::graph::{Graph, NodeId};
use crate::sampling::rng_from_seed;

/// Holme–Kim power-law cluster graph: preferential attachment with `m`
/// edges per new node, each attachment after the first followed by a
/// triad-formation step with probability `p_triad`. Connected for `m >= 1`.
pub fn holme_kim(n: usize, m: usize, p_triad: f64, seed: u64) -> Graph {
    assert!(m >= 1 && n > m, "holme_kim needs n > m >= 1");
    let mut rng = rng_from_seed(seed);
    let mut g = Graph::new(n);
    // Seed clique on m + 1 nodes keeps every early node reachable.
    for u in 0..=m {
        for v in u + 1..=m {
            g.add_edge(u, v);
        }
    }
    // Each stub appears once per incident edge: uniform pick = preferential.
    let mut stubs: Vec<NodeId> = g.edges().flat_map(|(u, v)| [u, v]).collect();
    for v in m + 1..n {
        let mut added = 0;
        let mut last: Option<NodeId> = None;
        let mut guard = 0;
        while added < m && guard < 100 * m {
            guard += 1;
            let target = match last {
                Some(t) if rng.random::<f64>() < p_triad => {
                    let nb = g.neighbors(t);
                    let cands: Vec<NodeId> =
                        nb.iter().copied().filter(|&w| w != v && !g.has_edge(v, w)).collect();
                    if cands.is_empty() {
                        stubs[rng.random_range(0..stubs.len())]
                    } else {
                        cands[rng.random_range(0..cands.len())]
                    }
                }
                _ => stubs[rng.random_range(0..stubs.len())],
            };
            if target == v || g.has_edge(v, target) {
                continue;
            }
            g.add_edge(v, target);
            stubs.push(v);
            stubs.push(target);
            last = Some(target);
            added += 1;
        }
    }
    g
}

/// Erdős–Rényi `G(n, p)`.
pub fn gnp(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// Watts–Strogatz small world: ring lattice with `k / 2` neighbors per side,
/// each lattice edge rewired to a uniform endpoint with probability `beta`
/// when that keeps the graph simple.
pub fn watts_strogatz(n: usize, k: usize, beta: f64, seed: u64) -> Graph {
    assert!(k.is_multiple_of(2) && k < n, "watts_strogatz needs even k < n");
    let mut rng = rng_from_seed(seed);
    let mut g = Graph::new(n);
    for u in 0..n {
        for j in 1..=k / 2 {
            g.add_edge(u, (u + j) % n);
        }
    }
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if rng.random::<f64>() < beta {
                let w = rng.random_range(0..n);
                if w != u && !g.has_edge(u, w) && g.has_edge(u, v) {
                    g.remove_edge(u, v);
                    g.add_edge(u, w);
                }
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holme_kim_shape() {
        let g = holme_kim(500, 3, 0.7, 1);
        assert_eq!(g.node_count(), 500);
        assert!(g.is_connected());
        assert_eq!(g.edge_count(), 6 + 3 * 496);
        g.validate().unwrap();
        assert!(g.mean_clustering() > 0.2);
        assert_eq!(holme_kim(500, 3, 0.7, 1), g);
    }

    #[test]
    fn watts_strogatz_shape() {
        let lattice = watts_strogatz(100, 6, 0.0, 0);
        assert!(lattice.degrees().iter().all(|&d| d == 6));
        assert!((lattice.mean_clustering() - 0.6).abs() < 1e-12);
        let g = watts_strogatz(1000, 10, 0.1, 1);
        assert_eq!(g.edge_count(), 5000);
        assert!(g.mean_clustering() > 0.4);
    }

    #[test]
    fn gnp_density() {
        let g = gnp(200, 0.1, 3);
        let expected = 0.1 * 200.0 * 199.0 / 2.0;
        assert!((g.edge_count() as f64 - expected).abs() < 4.0 * expected.sqrt());
    }
}
