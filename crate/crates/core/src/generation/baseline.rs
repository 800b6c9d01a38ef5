//! Plain 2K construction: a deterministic simple graph with the target JDD,
//! randomized by JDD-preserving double-edge swaps.
//!
//! Every degree class deals its stubs round-robin over its nodes, one
//! partner class after another, so each node holds `⌊J'/D⌋` or `⌈J'/D⌉`
//! stubs towards every partner class. Such balanced demands are always
//! realizable under the capacity conditions: a cyclic pairing for two
//! classes, Havel–Hakimi inside a class.

use std::collections::{BTreeMap, BinaryHeap};

use log::debug;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::postprocess::TargetSpec;
use crate::sampling::rng_from_seed;

/// Swap attempts per edge during randomization.
const MIX_PER_EDGE: usize = 10;

/// Per-node stub demand towards partner class `l`, for one class.
type Demands = BTreeMap<usize, Vec<(NodeId, usize)>>;

fn deal(nodes: &[NodeId], partners: &[(usize, u64)]) -> Demands {
    let d = nodes.len();
    let mut out = Demands::new();
    let mut at = 0usize;
    for &(l, stubs) in partners {
        let stubs = stubs as usize;
        let (base, extra) = (stubs / d, stubs % d);
        let mut list: Vec<(NodeId, usize)> = (0..d)
            .map(|i| {
                let pos = (i + d - at % d) % d;
                (nodes[i], base + usize::from(pos < extra))
            })
            .filter(|&(_, c)| c > 0)
            .collect();
        // Nodes holding the extra stub first.
        list.sort_by_key(|&(v, c)| (std::cmp::Reverse(c), v));
        out.insert(l, list);
        at = (at + extra) % d;
    }
    out
}

fn bipartite(a: &[(NodeId, usize)], b: &[(NodeId, usize)], edges: &mut Vec<(NodeId, NodeId)>) {
    // `b` is ordered larger demand first, so dealing stubs cyclically over it
    // meets every demand; each `a` node's stubs are consecutive and fewer
    // than `b.len()`, hence land on distinct nodes.
    let mut i = 0;
    for &(u, c) in a {
        for _ in 0..c {
            edges.push((u, b[i % b.len()].0));
            i += 1;
        }
    }
}

fn havel_hakimi(demand: &[(NodeId, usize)], edges: &mut Vec<(NodeId, NodeId)>) -> Result<()> {
    let mut heap: BinaryHeap<(usize, NodeId)> = demand.iter().map(|&(v, c)| (c, v)).collect();
    while let Some((c, v)) = heap.pop() {
        if c == 0 {
            break;
        }
        let mut taken = Vec::with_capacity(c);
        for _ in 0..c {
            match heap.pop() {
                Some((cw, w)) if cw > 0 => taken.push((cw, w)),
                _ => {
                    return Err(Error::ConstructionFailure(format!(
                        "within-class demand of node {v} is not graphic"
                    )))
                }
            }
        }
        for (cw, w) in taken {
            edges.push((v, w));
            heap.push((cw - 1, w));
        }
    }
    Ok(())
}

/// Builds a simple graph with exactly the target JDD.
pub fn construct_2k_baseline(spec: &TargetSpec, seed: u64) -> Result<Graph> {
    let mut rng = rng_from_seed(seed);
    let mut target_degree: Vec<usize> = spec
        .degree_counts
        .iter()
        .flat_map(|(&k, &d)| std::iter::repeat_n(k, d as usize))
        .collect();
    target_degree.shuffle(&mut rng);
    let n = target_degree.len();
    let mut classes: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
    for (v, &k) in target_degree.iter().enumerate() {
        classes.entry(k).or_default().push(v);
    }
    let mut partners: BTreeMap<usize, Vec<(usize, u64)>> = BTreeMap::new();
    for ((k, l), c) in spec.jdd.iter() {
        if k == l {
            partners.entry(k).or_default().push((k, 2 * c));
        } else {
            partners.entry(k).or_default().push((l, c));
            partners.entry(l).or_default().push((k, c));
        }
    }
    let demands: BTreeMap<usize, Demands> = partners
        .iter_mut()
        .map(|(&k, p)| {
            p.sort_unstable();
            (k, deal(&classes[&k], p))
        })
        .collect();

    let mut edges = Vec::with_capacity(spec.edge_count() as usize);
    for ((k, l), _) in spec.jdd.iter() {
        if k == l {
            havel_hakimi(&demands[&k][&k], &mut edges)?;
        } else {
            bipartite(&demands[&k][&l], &demands[&l][&k], &mut edges);
        }
    }
    let mut g = Graph::from_edges(n, edges.iter().copied());
    if g.edge_count() != edges.len() {
        return Err(Error::ConstructionFailure("balanced pairing produced a multi-edge".into()));
    }
    randomize(&mut g, &mut edges, &target_degree, &mut rng);
    debug_assert_eq!(g.exact_jdd(), spec.jdd);
    Ok(g)
}

/// Swap `(u,v),(x,y) → (u,y),(x,v)` with `deg(u) = deg(x)`, kept only when
/// the result stays simple.
fn randomize(g: &mut Graph, edges: &mut [(NodeId, NodeId)], degree: &[usize], rng: &mut impl Rng) {
    let m = edges.len();
    if m < 2 {
        return;
    }
    let mut swaps = 0usize;
    for _ in 0..MIX_PER_EDGE * m {
        let i = rng.random_range(0..m);
        let j = rng.random_range(0..m);
        if i == j {
            continue;
        }
        let (mut u, mut v) = edges[i];
        if rng.random::<bool>() {
            std::mem::swap(&mut u, &mut v);
        }
        let (mut x, mut y) = edges[j];
        if rng.random::<bool>() {
            std::mem::swap(&mut x, &mut y);
        }
        if degree[u] != degree[x] || u == y || x == v || g.has_edge(u, y) || g.has_edge(x, v) {
            continue;
        }
        g.remove_edge(u, v);
        g.remove_edge(x, y);
        g.add_edge(u, y);
        g.add_edge(x, v);
        edges[i] = (u, y);
        edges[j] = (x, v);
        swaps += 1;
    }
    debug!("2K baseline: {swaps} randomizing swaps over {m} edges");
}
