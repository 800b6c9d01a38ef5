//! Triangle-rich construction with an exact target JDD.
//!
//! Nodes get target degrees and random ring coordinates; node pairs are then
//! considered in order of increasing ring distance and joined whenever
//! neither node nor the degree pair is saturated. Whatever the greedy pass
//! leaves open is closed by local rewiring moves that keep every other JDD
//! entry fixed.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};

use log::debug;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::jdd::IntJdd;
use crate::postprocess::TargetSpec;
use crate::sampling::rng_from_seed;

/// A graph under construction, tracking its JDD against the target.
#[derive(Debug, Clone)]
pub struct ConstructionState {
    pub graph: Graph,
    pub target_degree: Vec<usize>,
    /// Ring coordinate `r_v` in `(0, 1)`.
    pub coordinates: Vec<f64>,
    pub current_jdd: IntJdd,
    pub target_jdd: IntJdd,
    rng: ChaCha8Rng,
}

impl ConstructionState {
    pub fn node_count(&self) -> usize {
        self.target_degree.len()
    }

    /// Whether the graph matches the target JDD (and so every target degree).
    pub fn is_complete(&self) -> bool {
        self.current_jdd == self.target_jdd
    }

    fn class_pair(&self, u: NodeId, v: NodeId) -> (usize, usize) {
        (self.target_degree[u], self.target_degree[v])
    }

    fn open(&self, k: usize, l: usize) -> bool {
        self.current_jdd.get(k, l) < self.target_jdd.get(k, l)
    }

    fn link(&mut self, u: NodeId, v: NodeId) {
        let added = self.graph.add_edge(u, v);
        debug_assert!(added, "edge {u}-{v} already present");
        let (k, l) = self.class_pair(u, v);
        self.current_jdd.add(k, l, 1);
    }

    fn unlink(&mut self, u: NodeId, v: NodeId) {
        let removed = self.graph.remove_edge(u, v);
        debug_assert!(removed, "edge {u}-{v} missing");
        let (k, l) = self.class_pair(u, v);
        let c = self.current_jdd.get(k, l);
        self.current_jdd.set(k, l, c - 1);
    }

    fn deficit(&self, v: NodeId) -> usize {
        self.target_degree[v] - self.graph.degree(v)
    }
}

/// Creates `D(k)` nodes of target degree `k` in random order, each with a
/// random ring coordinate.
pub fn assign_degrees(spec: &TargetSpec, seed: u64) -> ConstructionState {
    let mut rng = rng_from_seed(seed);
    let mut target_degree: Vec<usize> = spec
        .degree_counts
        .iter()
        .flat_map(|(&k, &d)| std::iter::repeat_n(k, d as usize))
        .collect();
    target_degree.shuffle(&mut rng);
    let coordinates = (0..target_degree.len())
        .map(|_| loop {
            let r: f64 = rng.random();
            if r > 0.0 {
                break r;
            }
        })
        .collect();
    ConstructionState {
        graph: Graph::new(target_degree.len()),
        target_degree,
        coordinates,
        current_jdd: IntJdd::new(),
        target_jdd: spec.jdd.clone(),
        rng,
    }
}

/// Candidate pair `(i, j)` of ring positions at forward arc `dist`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    dist: f64,
    i: usize,
    j: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.i.cmp(&other.i))
            .then(self.j.cmp(&other.j))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// "Next live position" over the ring, with path compression.
struct NextAlive {
    next: Vec<usize>,
}

impl NextAlive {
    fn new(n: usize) -> Self {
        NextAlive {
            next: (0..=n).collect(),
        }
    }

    fn find(&mut self, mut p: usize) -> usize {
        let mut root = p;
        while self.next[root] != root {
            root = self.next[root];
        }
        while self.next[p] != root {
            let up = self.next[p];
            self.next[p] = root;
            p = up;
        }
        root
    }

    fn kill(&mut self, p: usize) {
        self.next[p] = p + 1;
    }

    /// First live position at or after `p`, wrapping once.
    fn circular(&mut self, p: usize) -> Option<usize> {
        let n = self.next.len() - 1;
        let q = self.find(p);
        if q < n {
            return Some(q);
        }
        let q = self.find(0);
        (q < n).then_some(q)
    }
}

/// Liveness bookkeeping for the greedy pass. A node is live while it is
/// below its target degree and its degree class still has an open JDD entry
/// towards a class with another live node.
struct Liveness {
    alive: Vec<bool>,
    class_alive: BTreeMap<usize, bool>,
    alive_count: BTreeMap<usize, usize>,
    members: BTreeMap<usize, Vec<NodeId>>,
    row: BTreeMap<usize, Vec<usize>>,
}

impl Liveness {
    fn class_has_work(&self, st: &ConstructionState, k: usize) -> bool {
        self.row[&k].iter().any(|&l| {
            st.open(k, l) && self.alive_count.get(&l).copied().unwrap_or(0) > usize::from(l == k)
        })
    }

    /// Kills node `v` and re-evaluates classes whose status may change.
    fn kill(&mut self, st: &ConstructionState, dsu: &mut NextAlive, pos: &[usize], v: NodeId) {
        let mut pending = vec![v];
        let mut recheck: Vec<usize> = Vec::new();
        loop {
            while let Some(v) = pending.pop() {
                if !self.alive[v] {
                    continue;
                }
                self.alive[v] = false;
                dsu.kill(pos[v]);
                let k = st.target_degree[v];
                let c = self.alive_count.get_mut(&k).unwrap();
                *c -= 1;
                if *c <= 1 {
                    recheck.extend(self.row[&k].iter().copied());
                }
            }
            let Some(k) = recheck.pop() else { break };
            if self.class_alive[&k] && !self.class_has_work(st, k) {
                self.class_alive.insert(k, false);
                pending.extend(self.members[&k].iter().copied().filter(|&u| self.alive[u]));
            }
        }
    }

    fn recheck_classes(&mut self, st: &ConstructionState, dsu: &mut NextAlive, pos: &[usize], classes: [usize; 2]) {
        for k in classes {
            if self.class_alive[&k] && !self.class_has_work(st, k) {
                self.class_alive.insert(k, false);
                let live: Vec<NodeId> = self.members[&k].iter().copied().filter(|&u| self.alive[u]).collect();
                for u in live {
                    self.kill(st, dsu, pos, u);
                }
            }
        }
    }
}

/// Adds edges between node pairs in order of increasing ring distance
/// `min(|r_u - r_v|, 1 - |r_u - r_v|)` while the pair's JDD entry and both
/// node degrees are below target.
///
/// Pairs are produced lazily: each node keeps a cursor walking forward
/// around the ring, a heap merges the cursors by distance, and nodes that
/// can no longer gain an edge are skipped. Skipped pairs would have been
/// rejected anyway, so the outcome equals processing the fully sorted pair
/// list.
pub fn greedy_local_edges(mut st: ConstructionState) -> ConstructionState {
    let n = st.node_count();
    if n < 2 {
        return st;
    }
    let mut order: Vec<NodeId> = (0..n).collect();
    order.sort_by(|&a, &b| st.coordinates[a].total_cmp(&st.coordinates[b]).then(a.cmp(&b)));
    let mut pos = vec![0; n];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    let ring: Vec<f64> = order.iter().map(|&v| st.coordinates[v]).collect();

    let mut live = Liveness {
        alive: vec![true; n],
        class_alive: BTreeMap::new(),
        alive_count: BTreeMap::new(),
        members: BTreeMap::new(),
        row: BTreeMap::new(),
    };
    for (v, &k) in st.target_degree.iter().enumerate() {
        live.members.entry(k).or_default().push(v);
        *live.alive_count.entry(k).or_insert(0) += 1;
    }
    for &k in live.members.keys() {
        live.row.insert(k, Vec::new());
    }
    for ((k, l), _) in st.target_jdd.iter() {
        live.row.get_mut(&k).unwrap().push(l);
        if k != l {
            live.row.get_mut(&l).unwrap().push(k);
        }
    }
    let mut dsu = NextAlive::new(n);
    let classes: Vec<usize> = live.members.keys().copied().collect();
    for &k in &classes {
        live.class_alive.insert(k, true);
    }
    for &k in &classes {
        if live.class_alive[&k] && !live.class_has_work(&st, k) {
            live.class_alive.insert(k, false);
            let members = live.members[&k].clone();
            for u in members {
                live.kill(&st, &mut dsu, &pos, u);
            }
        }
    }

    // Next candidate for ring position `pi` after position `pj`.
    let advance = |dsu: &mut NextAlive, pi: usize, pj: usize| -> Option<Candidate> {
        let q = dsu.circular((pj + 1) % n)?;
        if q == pi {
            return None;
        }
        let arc = if q > pi { ring[q] - ring[pi] } else { ring[q] + 1.0 - ring[pi] };
        if arc < 0.5 || (arc == 0.5 && order[pi] < order[q]) {
            Some(Candidate { dist: arc, i: pi, j: q })
        } else {
            None
        }
    };

    let mut heap = BinaryHeap::new();
    for pi in 0..n {
        if live.alive[order[pi]] {
            if let Some(c) = advance(&mut dsu, pi, pi) {
                heap.push(Reverse(c));
            }
        }
    }
    let mut considered = 0u64;
    while let Some(Reverse(c)) = heap.pop() {
        let (u, v) = (order[c.i], order[c.j]);
        if !live.alive[u] {
            continue;
        }
        if live.alive[v] {
            considered += 1;
            let (k, l) = st.class_pair(u, v);
            if st.open(k, l) {
                st.link(u, v);
                for w in [u, v] {
                    if st.deficit(w) == 0 {
                        live.kill(&st, &mut dsu, &pos, w);
                    }
                }
                if !st.open(k, l) {
                    live.recheck_classes(&st, &mut dsu, &pos, [k, l]);
                }
            }
            if !live.alive[u] {
                continue;
            }
        }
        if let Some(next) = advance(&mut dsu, c.i, c.j) {
            heap.push(Reverse(next));
        }
    }
    debug!(
        "greedy pass: {} of {} edges after {considered} live pairs",
        st.graph.edge_count(),
        st.target_jdd.total_mass()
    );
    st
}

/// Limits for [`complete_jdd`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompletionOptions {
    /// Moves allowed per missing edge, on top of `base_budget`.
    pub moves_per_edge: u64,
    pub base_budget: u64,
}

impl Default for CompletionOptions {
    fn default() -> Self {
        CompletionOptions {
            moves_per_edge: 200,
            base_budget: 10_000,
        }
    }
}

/// Closes the remaining JDD gap.
///
/// For an open entry `(k,l)` with under-degree nodes `a` (class `k`) and
/// `b` (class `l`):
/// * if `a` and `b` are not adjacent, join them;
/// * otherwise find `c` in class `l`, not adjacent to `a`, with a neighbor
///   `d` not adjacent to `b`: add `(a,c)` and turn `(c,d)` into `(b,d)`;
/// * if every such `d` is adjacent to `b`, add `(a,c)` and drop `(c,d)`,
///   which moves the gap to the pair `(b, d)`;
/// * if `a` is adjacent to all of class `l`, join two saturated nodes of
///   classes `k` and `l` and drop one other edge at each, leaving two
///   smaller gaps.
pub fn complete_jdd(mut st: ConstructionState, opts: CompletionOptions) -> Result<Graph> {
    let mut members: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
    for (v, &k) in st.target_degree.iter().enumerate() {
        members.entry(k).or_default().push(v);
    }
    let missing = st.target_jdd.total_mass() - st.current_jdd.total_mass();
    let budget = opts.base_budget + opts.moves_per_edge * missing.max(0.0) as u64;
    let mut moves = [0u64; 4];
    let mut steps = 0u64;
    loop {
        let open: Vec<(usize, usize)> = st
            .target_jdd
            .iter()
            .filter(|&((k, l), t)| st.current_jdd.get(k, l) < t)
            .map(|(key, _)| key)
            .collect();
        if open.is_empty() {
            break;
        }
        steps += 1;
        if steps > budget {
            let dump: Vec<String> = open
                .iter()
                .map(|&(k, l)| format!("({k},{l}) {}/{}", st.current_jdd.get(k, l), st.target_jdd.get(k, l)))
                .collect();
            return Err(Error::ConstructionFailure(format!(
                "JDD still incomplete after {budget} moves; open entries: {}",
                dump.join(", ")
            )));
        }
        let (k, l) = open[st.rng.random_range(0..open.len())];
        let short_k: Vec<NodeId> = members[&k].iter().copied().filter(|&v| st.deficit(v) > 0).collect();
        let short_l: Vec<NodeId> = members[&l].iter().copied().filter(|&v| st.deficit(v) > 0).collect();
        if short_k.is_empty() || short_l.is_empty() {
            return Err(Error::ConstructionFailure(format!(
                "entry ({k},{l}) is open but a class has no node below target degree"
            )));
        }

        if let Some((a, b)) = free_pair(&st, &short_k, &short_l) {
            st.link(a, b);
            moves[0] += 1;
            continue;
        }

        // Any a, b (a == b only when it is the single short node of class k = l
        // with two missing stubs).
        let a = short_k[st.rng.random_range(0..short_k.len())];
        let others: Vec<NodeId> = short_l.iter().copied().filter(|&b| b != a).collect();
        let b = if others.is_empty() {
            a
        } else {
            others[st.rng.random_range(0..others.len())]
        };

        if rewire_through_helper(&mut st, &members, a, b) || rewire_through_helper(&mut st, &members, b, a) {
            moves[1] += 1;
            continue;
        }
        if shift_gap(&mut st, &members, a, b) || shift_gap(&mut st, &members, b, a) {
            moves[2] += 1;
            continue;
        }
        if !split_gap(&mut st, &members, k, l) {
            return Err(Error::ConstructionFailure(format!(
                "no rewiring move available for open entry ({k},{l})"
            )));
        }
        moves[3] += 1;
    }
    debug!(
        "completion: {} direct, {} rewire, {} shift, {} split moves",
        moves[0], moves[1], moves[2], moves[3]
    );
    Ok(st.graph)
}

/// Nodes of `q`'s class that `p` could be joined to.
fn helpers(st: &mut ConstructionState, members: &BTreeMap<usize, Vec<NodeId>>, p: NodeId, q: NodeId) -> Vec<NodeId> {
    let mut hs: Vec<NodeId> = members[&st.target_degree[q]]
        .iter()
        .copied()
        .filter(|&c| c != p && c != q && st.graph.degree(c) > 0 && !st.graph.has_edge(p, c))
        .collect();
    hs.shuffle(&mut st.rng);
    hs
}

/// Adds `(p,c)` and turns `(c,d)` into `(q,d)`, with `c` in `q`'s class.
/// Every entry but `(class p, class q)` is unchanged.
fn rewire_through_helper(st: &mut ConstructionState, members: &BTreeMap<usize, Vec<NodeId>>, p: NodeId, q: NodeId) -> bool {
    for c in helpers(st, members, p, q) {
        let ds: Vec<NodeId> = st
            .graph
            .neighbors(c)
            .iter()
            .copied()
            .filter(|&d| d != p && d != q && !st.graph.has_edge(q, d))
            .collect();
        if ds.is_empty() {
            continue;
        }
        let d = ds[st.rng.random_range(0..ds.len())];
        st.link(p, c);
        st.unlink(c, d);
        st.link(q, d);
        return true;
    }
    false
}

/// Adds `(p,c)` and drops `(c,d)`: `p` is done and the gap moves to the
/// pair `(q, d)`.
fn shift_gap(st: &mut ConstructionState, members: &BTreeMap<usize, Vec<NodeId>>, p: NodeId, q: NodeId) -> bool {
    let Some(&c) = helpers(st, members, p, q).first() else {
        return false;
    };
    let ds: Vec<NodeId> = st.graph.neighbors(c).iter().copied().filter(|&d| d != p && d != q).collect();
    if ds.is_empty() {
        return false;
    }
    let d = ds[st.rng.random_range(0..ds.len())];
    st.link(p, c);
    st.unlink(c, d);
    true
}

/// Joins non-adjacent `c` (class `k`) and `e` (class `l`), then drops one
/// other edge at whichever of them went over target, leaving up to two
/// smaller gaps.
fn split_gap(st: &mut ConstructionState, members: &BTreeMap<usize, Vec<NodeId>>, k: usize, l: usize) -> bool {
    let mut cs = members[&k].clone();
    let mut es = members[&l].clone();
    cs.shuffle(&mut st.rng);
    es.shuffle(&mut st.rng);
    let mut found = None;
    'search: for &c in &cs {
        for &e in &es {
            if c != e && !st.graph.has_edge(c, e) && (st.deficit(c) == 0 || st.deficit(e) == 0) {
                found = Some((c, e));
                break 'search;
            }
        }
    }
    let Some((c, e)) = found else {
        return false;
    };
    st.link(c, e);
    for (w, other) in [(c, e), (e, c)] {
        if st.graph.degree(w) > st.target_degree[w] {
            let xs: Vec<NodeId> = st.graph.neighbors(w).iter().copied().filter(|&x| x != other).collect();
            let x = xs[st.rng.random_range(0..xs.len())];
            st.unlink(w, x);
        }
    }
    true
}

/// A non-adjacent pair of distinct short nodes, one from each list.
fn free_pair(st: &ConstructionState, ks: &[NodeId], ls: &[NodeId]) -> Option<(NodeId, NodeId)> {
    for &a in ks {
        for &b in ls {
            if a != b && !st.graph.has_edge(a, b) {
                return Some((a, b));
            }
        }
    }
    None
}

/// Steps 1–3: a triangle-rich graph with exactly the target JDD.
pub fn construct_2kt(spec: &TargetSpec, seed: u64) -> Result<Graph> {
    let st = greedy_local_edges(assign_degrees(spec, seed));
    let g = complete_jdd(st, CompletionOptions::default())?;
    if g.exact_jdd() != spec.jdd {
        return Err(Error::ConstructionFailure("constructed JDD differs from target".into()));
    }
    Ok(g)
}
