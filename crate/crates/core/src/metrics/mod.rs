//! Graph comparison: nine properties, each reduced to a discrete
//! distribution and scored against a reference by NMAE.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub mod basic;
pub mod cliques;
pub mod compare;
pub mod cycles;
pub mod paths;
pub mod spectrum;

pub use basic::{avg_neighbor_degree, degree_distribution, edgewise_shared_partners, jdd_distribution};
pub use cliques::{maximal_cliques, maximal_cliques_partial};
pub use compare::{compare, CompareOptions, ComparisonReport, Metric, MetricResult, MetricStatus};
pub use cycles::{cycle_basis_distribution, CycleBasisOptions, CycleBasisOutcome};
pub use paths::{closeness_centrality, closeness_histogram, shortest_path_distribution, PathHistogram};
pub use spectrum::{spectrum_top, SPECTRUM_COUNT};

/// Integer-keyed histogram or per-key average.
pub type Distribution = BTreeMap<usize, f64>;

/// `Σ|est − ref| / Σ ref` over the union of keys, missing keys read as 0.
pub fn nmae<K: Ord + Clone>(est: &BTreeMap<K, f64>, reference: &BTreeMap<K, f64>) -> Result<f64> {
    let mass: f64 = reference.values().sum();
    if mass <= 0.0 || !mass.is_finite() {
        return Err(Error::Input(format!("NMAE needs positive reference mass, got {mass}")));
    }
    Ok(abs_diff(est, reference) / mass)
}

/// NMAE with `Σ|ref|` in the denominator, for signed vectors such as
/// eigenvalue lists.
pub fn nmae_abs<K: Ord + Clone>(est: &BTreeMap<K, f64>, reference: &BTreeMap<K, f64>) -> Result<f64> {
    let mass: f64 = reference.values().map(|v| v.abs()).sum();
    if mass <= 0.0 || !mass.is_finite() {
        return Err(Error::Input(format!("NMAE needs nonzero reference, got mass {mass}")));
    }
    Ok(abs_diff(est, reference) / mass)
}

fn abs_diff<K: Ord + Clone>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
    let mut total = 0.0;
    for (k, &x) in a {
        total += (x - b.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, &y) in b {
        if !a.contains_key(k) {
            total += y.abs();
        }
    }
    total
}

/// Rescales a histogram to unit mass; an empty one stays empty.
pub fn normalized<K: Ord + Clone>(h: &BTreeMap<K, f64>) -> BTreeMap<K, f64> {
    let mass: f64 = h.values().sum();
    if mass == 0.0 {
        return h.clone();
    }
    h.iter().map(|(k, &v)| (k.clone(), v / mass)).collect()
}

/// Worker count for the internally parallel metrics.
pub(crate) fn workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}
