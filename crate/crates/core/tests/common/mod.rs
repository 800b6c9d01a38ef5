//! Shared fixtures for the integration tests: small-graph enumeration,
//! brute-force oracles, the synthetic corpus and optional real datasets.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use dk25::graph::named;
use dk25::io::read_edge_list_file;
use dk25::synth::{gnp, holme_kim, watts_strogatz};
use dk25::{Graph, IntJdd};
use rand::Rng;

pub type Hist = BTreeMap<usize, f64>;

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

pub fn graph_from_mask(n: usize, mask: u64) -> Graph {
    let p = pairs(n);
    Graph::from_edges(n, (0..p.len()).filter(|&b| mask >> b & 1 == 1).map(|b| p[b]))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// One labelled representative of every isomorphism class on `n <= 6`
/// nodes.
pub fn iso_classes(n: usize) -> Vec<Graph> {
    assert!(n <= 6);
    let p = pairs(n);
    let index: BTreeMap<(usize, usize), usize> = p.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let perms = permutations(n);
    let mut seen: HashSet<u64> = HashSet::new();
    let mut reps = Vec::new();
    for mask in 0..1u64 << p.len() {
        if seen.contains(&mask) {
            continue;
        }
        reps.push(graph_from_mask(n, mask));
        for perm in &perms {
            let mut image = 0u64;
            for (b, &(i, j)) in p.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    let (a, c) = (perm[i].min(perm[j]), perm[i].max(perm[j]));
                    image |= 1 << index[&(a, c)];
                }
            }
            seen.insert(image);
        }
    }
    reps
}

/// Every 7-node graph is a 6-node graph plus a node with some neighbor set,
/// so extending each 6-node class by all 64 neighbor sets covers every
/// isomorphism class on 7 nodes (most more than once).
pub fn seven_node_cover() -> Vec<Graph> {
    let mut out = Vec::new();
    for g in iso_classes(6) {
        for s in 0..64u32 {
            let mut edges: Vec<(usize, usize)> = g.edges().collect();
            edges.extend((0..6).filter(|&v| s >> v & 1 == 1).map(|v| (v, 6)));
            out.push(Graph::from_edges(7, edges));
        }
    }
    out
}

/// All isomorphism classes on 1..=6 nodes plus the 7-node cover.
pub fn small_graphs() -> Vec<Graph> {
    let mut out: Vec<Graph> = (1..=6).flat_map(iso_classes).collect();
    out.extend(seven_node_cover());
    out
}

pub fn brute_triangles(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let mut t = vec![0; n];
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c) {
                    t[a] += 1;
                    t[b] += 1;
                    t[c] += 1;
                }
            }
        }
    }
    t
}

pub fn brute_esp(g: &Graph) -> Hist {
    let n = g.node_count();
    let mut h = Hist::new();
    for (u, v) in g.edges() {
        let s = (0..n).filter(|&w| g.has_edge(u, w) && g.has_edge(v, w)).count();
        *h.entry(s).or_insert(0.0) += 1.0;
    }
    h
}

/// Maximal cliques by checking every vertex subset.
pub fn brute_cliques(g: &Graph) -> Hist {
    let n = g.node_count();
    let is_clique = |m: u32| {
        (0..n).all(|a| (a + 1..n).all(|b| m >> a & 1 == 0 || m >> b & 1 == 0 || g.has_edge(a, b)))
    };
    let mut h = Hist::new();
    for m in 1..1u32 << n {
        if !is_clique(m) {
            continue;
        }
        let maximal = (0..n).filter(|&v| m >> v & 1 == 0).all(|v| !is_clique(m | 1 << v));
        if maximal {
            *h.entry(m.count_ones() as usize).or_insert(0.0) += 1.0;
        }
    }
    h
}

pub fn brute_components(g: &Graph) -> usize {
    let n = g.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    let mut comps = n;
    for (u, v) in g.edges() {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
            comps -= 1;
        }
    }
    comps
}

/// Minimum cycle basis length histogram: every simple cycle enumerated,
/// then the greedy matroid basis over GF(2) edge masks.
pub fn brute_cycle_basis(g: &Graph) -> Hist {
    let edges: Vec<(usize, usize)> = g.edges().collect();
    assert!(edges.len() <= 64);
    let id = |a: usize, b: usize| edges.iter().position(|&e| e == (a.min(b), a.max(b))).unwrap();
    let mut cycles: HashSet<u64> = HashSet::new();
    fn dfs(g: &Graph, start: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let last = *path.last().unwrap();
        for &w in g.neighbors(last) {
            if w == start && path.len() >= 3 {
                out.push(path.clone());
            } else if w > start && !path.contains(&w) {
                path.push(w);
                dfs(g, start, path, out);
                path.pop();
            }
        }
    }
    for s in 0..g.node_count() {
        let mut found = Vec::new();
        dfs(g, s, &mut vec![s], &mut found);
        for c in found {
            let mut mask = 0u64;
            for i in 0..c.len() {
                mask |= 1 << id(c[i], c[(i + 1) % c.len()]);
            }
            cycles.insert(mask);
        }
    }
    let mut cycles: Vec<u64> = cycles.into_iter().collect();
    cycles.sort_by_key(|m| (m.count_ones(), *m));
    let mut basis: Vec<u64> = Vec::new();
    let mut h = Hist::new();
    for c in cycles {
        let mut r = c;
        for &b in &basis {
            r = r.min(r ^ b);
        }
        if r != 0 {
            basis.push(r);
            basis.sort_unstable_by(|a, b| b.cmp(a));
            *h.entry(c.count_ones() as usize).or_insert(0.0) += 1.0;
        }
    }
    h
}

/// Ordered-pair hop histogram of the largest component (ties to the
/// component holding the smallest node) by Floyd–Warshall.
pub fn floyd_hist(g: &Graph) -> Hist {
    let n = g.node_count();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for (u, v) in g.edges() {
        d[u][v] = 1;
        d[v][u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let size = |v: usize| d[v].iter().filter(|&&x| x < inf).count();
    let root = (0..n).max_by_key(|&v| (size(v), std::cmp::Reverse(v))).unwrap();
    let members: Vec<usize> = (0..n).filter(|&v| d[root][v] < inf).collect();
    let mut h = Hist::new();
    for &a in &members {
        for &b in &members {
            if a != b {
                *h.entry(d[a][b]).or_insert(0.0) += 1.0;
            }
        }
    }
    h
}

/// Synthetic corpus standing in for real topologies; all connected.
pub fn corpus() -> Vec<(String, Graph)> {
    let mut out = vec![
        ("holme-kim 200 m2 p0.5".to_string(), holme_kim(200, 2, 0.5, 1)),
        ("holme-kim 500 m3 p0.7".to_string(), holme_kim(500, 3, 0.7, 2)),
        ("holme-kim 1000 m3 p0.7".to_string(), holme_kim(1000, 3, 0.7, 42)),
        ("holme-kim 2000 m4 p0.5".to_string(), holme_kim(2000, 4, 0.5, 4)),
        ("holme-kim 5000 m3 p0.7".to_string(), holme_kim(5000, 3, 0.7, 5)),
        ("watts-strogatz 500 k6 b0.2".to_string(), watts_strogatz(500, 6, 0.2, 6)),
        ("watts-strogatz 1000 k10 b0.1".to_string(), watts_strogatz(1000, 10, 0.1, 7)),
        ("gnp 300 p0.03".to_string(), gnp(300, 0.03, 8)),
        ("gnp 1000 p0.008".to_string(), gnp(1000, 0.008, 9)),
        ("cycle 50".to_string(), named::cycle(50)),
    ];
    for (_, g) in out.iter_mut() {
        *g = g.largest_component().0;
    }
    out
}

/// The 1000-node clustered synthetic used by the estimation and
/// end-to-end checks.
pub fn clustered_1000() -> Graph {
    holme_kim(1000, 3, 0.7, 42)
}

/// Real edge list named by environment variable `var`, reduced to its
/// largest component.
pub fn dataset(var: &str) -> Option<Graph> {
    let path = PathBuf::from(std::env::var_os(var)?);
    let loaded = read_edge_list_file(&path).unwrap_or_else(|e| panic!("{var}={}: {e}", path.display()));
    Some(loaded.graph.largest_component().0)
}

/// CAIDA AS topology if supplied, else a Holme–Kim graph with the same node
/// count, a comparable edge count (~53k) and mean clustering (~0.21).
pub fn caida() -> (Graph, String) {
    match dataset("DK25_CAIDA_AS") {
        Some(g) => (g, "CAIDA AS (supplied)".into()),
        None => (
            holme_kim(26_475, 2, 0.28, 2004),
            "synthetic stand-in for CAIDA AS (holme-kim 26475 m2 p0.28)".into(),
        ),
    }
}

/// Perturbs an exact JDD: entries scaled by a random factor in [0.5, 1.5]
/// with ±2 jitter, a few entries dropped and a few spurious ones added.
pub fn perturb(jdd: &IntJdd, seed: u64) -> IntJdd {
    let mut rng = dk25::sampling::rng_from_seed(seed);
    let degrees = jdd.degrees();
    let mut out = IntJdd::new();
    for ((k, l), c) in jdd.iter() {
        if rng.random::<f64>() < 0.05 {
            continue;
        }
        let v = (c as f64 * rng.random_range(0.5..1.5)).round() as i64 + rng.random_range(-2..=2);
        if v > 0 {
            out.set(k, l, v as u64);
        }
    }
    let max = degrees.iter().copied().max().unwrap_or(1) + 2;
    for _ in 0..rng.random_range(0..5) {
        let k = rng.random_range(1..=max);
        let l = rng.random_range(1..=max);
        out.add(k, l, rng.random_range(1..6));
    }
    out
}
