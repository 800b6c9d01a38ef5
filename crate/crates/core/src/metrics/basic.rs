//! Degree-level metrics: DD, Knn, JDD and edgewise shared partners.

use std::collections::BTreeMap;

use super::Distribution;
use crate::graph::{intersection_count, Graph};

/// Number of nodes per degree.
pub fn degree_distribution(g: &Graph) -> Distribution {
    g.degree_histogram().into_iter().map(|(k, n)| (k, n as f64)).collect()
}

/// For each degree `k >= 1`, the mean over nodes of degree `k` of their mean
/// neighbor degree.
pub fn avg_neighbor_degree(g: &Graph) -> Distribution {
    let mut sums: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for v in 0..g.node_count() {
        let nb = g.neighbors(v);
        if nb.is_empty() {
            continue;
        }
        let mean = nb.iter().map(|&w| g.degree(w) as f64).sum::<f64>() / nb.len() as f64;
        let e = sums.entry(nb.len()).or_insert((0.0, 0));
        e.0 += mean;
        e.1 += 1;
    }
    sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

/// Exact JDD as a real-valued vector keyed by `(k, l)`, `k <= l`.
pub fn jdd_distribution(g: &Graph) -> BTreeMap<(usize, usize), f64> {
    g.exact_jdd().as_vector()
}

/// Number of edges whose endpoints share exactly `s` neighbors, per `s`.
pub fn edgewise_shared_partners(g: &Graph) -> Distribution {
    let mut h = Distribution::new();
    for (u, v) in g.edges() {
        let s = intersection_count(g.neighbors(u), g.neighbors(v));
        *h.entry(s).or_insert(0.0) += 1.0;
    }
    h
}
