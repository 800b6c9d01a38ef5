//! Estimators of `JDD(k,l)` and `c̄(k)` from a node sample.
//!
//! * UIS: plain ratio estimators over induced edges.
//! * WIS (`w(v) = deg(v)`): Hansen–Hurwitz reweighting by `1/deg`.
//! * RW: either *induced edges* between samples more than `margin` steps
//!   apart (treating the walk as WIS), or *traversed edges*, the consecutive
//!   pairs of the walk, which are asymptotically uniform over `E`.
//! * Hybrid: traversed edges below the average degree, induced edges above.
//!
//! Shared-partner counts are always computed from the neighbor lists the
//! two sampled nodes revealed; nothing here looks at the source graph.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;

use log::debug;

use crate::error::{Error, Result};
use crate::graph::{intersection_count, NodeId};
use crate::io::{create, write_ck_lines, write_jdd_lines};
use crate::jdd::{DegreeClustering, RealJdd};
use crate::sampling::{Method, SampleTrace};

/// Default induced-edge safety margin.
pub const DEFAULT_MARGIN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    /// Minimum index distance between two walk samples forming an induced pair.
    pub margin: usize,
    /// Degree at which the hybrid switches from traversed to induced edges;
    /// estimated from the trace when `None`.
    pub hybrid_threshold: Option<f64>,
    pub known_nodes: Option<usize>,
    pub known_edges: Option<usize>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            margin: DEFAULT_MARGIN,
            hybrid_threshold: None,
            known_nodes: None,
            known_edges: None,
        }
    }
}

/// Which base estimator supplied a hybrid value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Traversed,
    Induced,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DegreeSupport {
    /// Sample records with this degree.
    pub samples: usize,
    /// Traversed-edge endpoints with this degree.
    pub traversed: usize,
    /// Induced (sample, neighbor-sample) pairs contributing to `ĉ(k)`.
    pub induced: usize,
    pub ck_source: Option<Source>,
    pub clamped: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub support: BTreeMap<usize, DegreeSupport>,
    /// Degrees sampled with `k >= 2` for which no `ĉ(k)` could be formed.
    pub omitted_ck: Vec<usize>,
    pub clamped: usize,
    pub average_degree: f64,
    pub edges_used: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EstimateBundle {
    pub jdd: RealJdd,
    pub ck: DegreeClustering,
    /// Estimated number of nodes per degree.
    pub vk: BTreeMap<usize, f64>,
    pub diagnostics: Diagnostics,
}

/// `ĉ(k)` together with the per-degree support it was computed from.
#[derive(Debug, Clone, Default)]
pub struct CkEstimate {
    pub ck: DegreeClustering,
    /// Number of contributing terms per degree.
    pub support: BTreeMap<usize, usize>,
    pub omitted: Vec<usize>,
    pub clamped: Vec<usize>,
}

/// Per-distinct-node view of a trace.
struct TraceIndex<'a> {
    slot: HashMap<NodeId, usize>,
    nodes: Vec<&'a [NodeId]>,
    degree: Vec<usize>,
    /// Trace positions of each distinct node, ascending.
    positions: Vec<Vec<usize>>,
    /// Slot of each trace position.
    at: Vec<usize>,
}

impl<'a> TraceIndex<'a> {
    fn new(trace: &'a SampleTrace) -> Self {
        let mut idx = TraceIndex {
            slot: HashMap::new(),
            nodes: Vec::new(),
            degree: Vec::new(),
            positions: Vec::new(),
            at: Vec::with_capacity(trace.len()),
        };
        for (i, r) in trace.records.iter().enumerate() {
            let s = *idx.slot.entry(r.node).or_insert_with(|| {
                idx.nodes.push(&r.neighbors);
                idx.degree.push(r.degree);
                idx.positions.push(Vec::new());
                idx.nodes.len() - 1
            });
            idx.positions[s].push(i);
            idx.at.push(s);
        }
        idx
    }

    fn count(&self, s: usize) -> usize {
        self.positions[s].len()
    }

    fn sp(&self, a: usize, b: usize) -> usize {
        intersection_count(self.nodes[a], self.nodes[b])
    }

    /// Sampled neighbors of slot `a` as slots.
    fn sampled_neighbors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.nodes[a].iter().filter_map(|b| self.slot.get(b).copied())
    }

    /// Visits of slot `b` more than `margin` positions away from `i`.
    fn far_visits(&self, b: usize, i: usize, margin: usize) -> usize {
        let p = &self.positions[b];
        let lo = p.partition_point(|&x| x + margin < i);
        let hi = p.partition_point(|&x| x <= i + margin);
        p.len() - (hi - lo)
    }
}

fn finish_ck(num: BTreeMap<usize, f64>, den: BTreeMap<usize, f64>, support: BTreeMap<usize, usize>, sampled: impl Iterator<Item = usize>) -> CkEstimate {
    let mut out = CkEstimate {
        support,
        ..Default::default()
    };
    for (&k, &d) in &den {
        if k < 2 || d <= 0.0 {
            continue;
        }
        let v = num[&k] / (d * (k as f64 - 1.0));
        if out.ck.insert(k, v) {
            out.clamped.push(k);
        }
    }
    let mut omitted: Vec<usize> = sampled.filter(|&k| k >= 2 && !out.ck.contains(k)).collect();
    omitted.sort_unstable();
    omitted.dedup();
    out.omitted = omitted;
    out
}

/// Weighted shared-partner ratio over sampled neighbors. `weight(b)` is the
/// per-visit weight of neighbor slot `b`.
fn ck_independence(trace: &SampleTrace, weight: impl Fn(&TraceIndex, usize) -> f64) -> CkEstimate {
    let idx = TraceIndex::new(trace);
    let mut num = BTreeMap::new();
    let mut den = BTreeMap::new();
    let mut support = BTreeMap::new();
    for a in 0..idx.nodes.len() {
        let k = idx.degree[a];
        if k < 2 {
            continue;
        }
        let (mut n, mut d, mut terms) = (0.0, 0.0, 0);
        for b in idx.sampled_neighbors(a) {
            let w = weight(&idx, b) * idx.count(b) as f64;
            n += idx.sp(a, b) as f64 * w;
            d += w;
            terms += idx.count(b);
        }
        let mult = idx.count(a) as f64;
        *num.entry(k).or_insert(0.0) += n * mult;
        *den.entry(k).or_insert(0.0) += d * mult;
        *support.entry(k).or_insert(0) += terms * idx.count(a);
    }
    finish_ck(num, den, support, idx.degree.iter().copied())
}

pub fn estimate_ck_uis_detailed(trace: &SampleTrace) -> Result<CkEstimate> {
    trace.expect_method(Method::Uis)?;
    Ok(ck_independence(trace, |_, _| 1.0))
}

pub fn estimate_ck_uis(trace: &SampleTrace) -> Result<DegreeClustering> {
    estimate_ck_uis_detailed(trace).map(|e| e.ck)
}

pub fn estimate_ck_wis_detailed(trace: &SampleTrace) -> Result<CkEstimate> {
    trace.expect_method(Method::Wis)?;
    Ok(ck_wis_unchecked(trace))
}

fn ck_wis_unchecked(trace: &SampleTrace) -> CkEstimate {
    ck_independence(trace, |idx, b| 1.0 / idx.degree[b] as f64)
}

pub fn estimate_ck_wis(trace: &SampleTrace) -> Result<DegreeClustering> {
    estimate_ck_wis_detailed(trace).map(|e| e.ck)
}

/// Induced-edge estimate over index pairs `(i, j)` with `|j - i| > margin`.
/// With `margin = 0` this is the WIS estimator applied to the walk.
pub fn estimate_ck_rw_induced_detailed(trace: &SampleTrace, margin: usize) -> Result<CkEstimate> {
    trace.expect_method(Method::Rw)?;
    let idx = TraceIndex::new(trace);
    // Per distinct node: (neighbor slot, sp/deg, 1/deg).
    let terms: Vec<Vec<(usize, f64, f64)>> = (0..idx.nodes.len())
        .map(|a| {
            if idx.degree[a] < 2 {
                return Vec::new();
            }
            idx.sampled_neighbors(a)
                .map(|b| {
                    let inv = 1.0 / idx.degree[b] as f64;
                    (b, idx.sp(a, b) as f64 * inv, inv)
                })
                .collect()
        })
        .collect();
    let mut num = BTreeMap::new();
    let mut den = BTreeMap::new();
    let mut support = BTreeMap::new();
    for (i, &a) in idx.at.iter().enumerate() {
        let k = idx.degree[a];
        if k < 2 {
            continue;
        }
        let (mut n, mut d, mut pairs) = (0.0, 0.0, 0);
        for &(b, spw, inv) in &terms[a] {
            let far = idx.far_visits(b, i, margin);
            if far > 0 {
                n += far as f64 * spw;
                d += far as f64 * inv;
                pairs += far;
            }
        }
        if pairs > 0 {
            *num.entry(k).or_insert(0.0) += n;
            *den.entry(k).or_insert(0.0) += d;
            *support.entry(k).or_insert(0) += pairs;
        }
    }
    Ok(finish_ck(num, den, support, idx.degree.iter().copied()))
}

pub fn estimate_ck_rw_induced(trace: &SampleTrace, margin: usize) -> Result<DegreeClustering> {
    estimate_ck_rw_induced_detailed(trace, margin).map(|e| e.ck)
}

/// Traversed-edge estimate over consecutive walk pairs.
pub fn estimate_ck_rw_traversed_detailed(trace: &SampleTrace) -> Result<CkEstimate> {
    trace.expect_method(Method::Rw)?;
    let mut num = BTreeMap::new();
    let mut den = BTreeMap::new();
    let mut support = BTreeMap::new();
    for w in trace.records.windows(2) {
        let (u, v) = (&w[0], &w[1]);
        let sp = intersection_count(&u.neighbors, &v.neighbors) as f64;
        for k in [u.degree, v.degree] {
            *num.entry(k).or_insert(0.0) += sp;
            *den.entry(k).or_insert(0.0) += 1.0;
            *support.entry(k).or_insert(0) += 1;
        }
    }
    Ok(finish_ck(
        num,
        den,
        support,
        trace.records.iter().map(|r| r.degree),
    ))
}

pub fn estimate_ck_rw_traversed(trace: &SampleTrace) -> Result<DegreeClustering> {
    estimate_ck_rw_traversed_detailed(trace).map(|e| e.ck)
}

fn store_pair(jdd: &mut RealJdd, k: usize, l: usize, value: f64) {
    if value > 0.0 && value.is_finite() {
        jdd.set(k, l, value);
    }
}

/// Observed induced edges per ordered degree pair, `k <= l` only, weighted
/// by the neighbor's visit count.
fn induced_edge_counts(idx: &TraceIndex) -> BTreeMap<(usize, usize), f64> {
    let mut obs = BTreeMap::new();
    for a in 0..idx.nodes.len() {
        let k = idx.degree[a];
        let ca = idx.count(a) as f64;
        for b in idx.sampled_neighbors(a) {
            let l = idx.degree[b];
            if k <= l {
                *obs.entry((k, l)).or_insert(0.0) += ca * idx.count(b) as f64;
            }
        }
    }
    obs
}

/// Induced-edge JDD under uniform independence sampling, scaled to
/// `known_nodes`.
pub fn estimate_jdd_uis(trace: &SampleTrace, known_nodes: usize) -> Result<RealJdd> {
    trace.expect_method(Method::Uis)?;
    if known_nodes == 0 {
        return Err(Error::Input("known node count must be positive".into()));
    }
    let idx = TraceIndex::new(trace);
    let n = trace.len() as f64;
    let mut per_degree: BTreeMap<usize, f64> = BTreeMap::new();
    for r in &trace.records {
        *per_degree.entry(r.degree).or_insert(0.0) += 1.0;
    }
    let vk: BTreeMap<usize, f64> = per_degree
        .iter()
        .map(|(&k, &s)| (k, known_nodes as f64 * s / n))
        .collect();
    let mut jdd = RealJdd::new();
    for ((k, l), o) in induced_edge_counts(&idx) {
        let frac = o / (per_degree[&k] * per_degree[&l]);
        let mut v = vk[&k] * vk[&l] * frac;
        if k == l {
            v /= 2.0;
        }
        store_pair(&mut jdd, k, l, v);
    }
    Ok(jdd)
}

/// Debiased node-count fraction per degree for degree-proportional samples:
/// `(Σ 1{deg=k}/deg) / (Σ 1/deg)`.
pub fn degree_fractions_weighted(trace: &SampleTrace) -> BTreeMap<usize, f64> {
    let mut w: BTreeMap<usize, f64> = BTreeMap::new();
    let mut total = 0.0;
    for r in trace.records.iter().filter(|r| r.degree > 0) {
        let inv = 1.0 / r.degree as f64;
        *w.entry(r.degree).or_insert(0.0) += inv;
        total += inv;
    }
    w.values_mut().for_each(|v| *v /= total);
    w
}

/// Average degree from a degree-proportional sample: `|S| / Σ 1/deg(s)`.
pub fn estimate_average_degree(trace: &SampleTrace) -> f64 {
    let (n, inv) = trace
        .records
        .iter()
        .filter(|r| r.degree > 0)
        .fold((0.0, 0.0), |(n, s), r| (n + 1.0, s + 1.0 / r.degree as f64));
    if inv > 0.0 {
        n / inv
    } else {
        0.0
    }
}

/// Induced-edge JDD for weighted independence samples, with degree counts
/// debiased and scaled to `known_nodes`.
pub fn estimate_jdd_wis(trace: &SampleTrace, known_nodes: usize) -> Result<RealJdd> {
    trace.expect_method(Method::Wis)?;
    if known_nodes == 0 {
        return Err(Error::Input("known node count must be positive".into()));
    }
    let idx = TraceIndex::new(trace);
    let mut per_degree: BTreeMap<usize, f64> = BTreeMap::new();
    for r in &trace.records {
        *per_degree.entry(r.degree).or_insert(0.0) += 1.0;
    }
    let frac = degree_fractions_weighted(trace);
    let mut jdd = RealJdd::new();
    for ((k, l), o) in induced_edge_counts(&idx) {
        let vk = known_nodes as f64 * frac[&k];
        let vl = known_nodes as f64 * frac[&l];
        let mut v = vk * vl * o / (per_degree[&k] * per_degree[&l]);
        if k == l {
            v /= 2.0;
        }
        store_pair(&mut jdd, k, l, v);
    }
    Ok(jdd)
}

/// Induced-edge JDD for a random walk: the fraction of index pairs with
/// `|j - i| > margin` and degrees `(k, l)` that are edges, scaled by the
/// debiased `|V_k| |V_l|`.
pub fn estimate_jdd_rw_induced(trace: &SampleTrace, margin: usize, known_nodes: usize) -> Result<RealJdd> {
    trace.expect_method(Method::Rw)?;
    if known_nodes == 0 {
        return Err(Error::Input("known node count must be positive".into()));
    }
    let idx = TraceIndex::new(trace);
    let n = trace.len();
    let deg_at: Vec<usize> = trace.records.iter().map(|r| r.degree).collect();

    // Edge pairs, ordered (i, j) with deg_i <= deg_j.
    let mut num: HashMap<(usize, usize), f64> = HashMap::new();
    for (i, &a) in idx.at.iter().enumerate() {
        let k = idx.degree[a];
        for b in idx.sampled_neighbors(a) {
            let l = idx.degree[b];
            if k > l {
                continue;
            }
            let far = idx.far_visits(b, i, margin);
            if far > 0 {
                *num.entry((k, l)).or_insert(0.0) += far as f64;
            }
        }
    }
    if num.is_empty() {
        return Ok(RealJdd::new());
    }

    // All ordered pairs minus the ones inside the margin window.
    let mut class_size: BTreeMap<usize, f64> = BTreeMap::new();
    for &k in &deg_at {
        *class_size.entry(k).or_insert(0.0) += 1.0;
    }
    let mut near: HashMap<(usize, usize), f64> = HashMap::new();
    for i in 0..n {
        let k = deg_at[i];
        let lo = i.saturating_sub(margin);
        let hi = (i + margin).min(n - 1);
        for &l in &deg_at[lo..=hi] {
            if k <= l {
                *near.entry((k, l)).or_insert(0.0) += 1.0;
            }
        }
    }

    let frac = degree_fractions_weighted(trace);
    let mut jdd = RealJdd::new();
    for (&(k, l), &edges) in &num {
        let total = class_size[&k] * class_size[&l];
        let pairs = total - near.get(&(k, l)).copied().unwrap_or(0.0);
        if pairs <= 0.0 {
            continue;
        }
        let vk = known_nodes as f64 * frac.get(&k).copied().unwrap_or(0.0);
        let vl = known_nodes as f64 * frac.get(&l).copied().unwrap_or(0.0);
        let mut v = vk * vl * edges / pairs;
        if k == l {
            v /= 2.0;
        }
        store_pair(&mut jdd, k, l, v);
    }
    Ok(jdd)
}

/// Traversed-edge JDD: the degree-pair mix of the walked edges, inflated by
/// `edges`.
pub fn estimate_jdd_rw_traversed(trace: &SampleTrace, edges: f64) -> Result<RealJdd> {
    trace.expect_method(Method::Rw)?;
    if trace.len() < 2 {
        return Err(Error::Input("traversed-edge estimator needs at least two samples".into()));
    }
    let steps = (trace.len() - 1) as f64;
    let mut counts: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for w in trace.records.windows(2) {
        let (k, l) = (w[0].degree, w[1].degree);
        *counts.entry((k.min(l), k.max(l))).or_insert(0.0) += 1.0;
    }
    let mut jdd = RealJdd::new();
    for ((k, l), c) in counts {
        store_pair(&mut jdd, k, l, edges * c / steps);
    }
    Ok(jdd)
}

/// Resolves `|E|` for the traversed-edge estimator: the known value, or
/// `N̂ k̄ / 2` from the known node count and the trace's average degree.
pub fn resolve_edge_count(trace: &SampleTrace, cfg: &EstimatorConfig) -> Result<f64> {
    if let Some(e) = cfg.known_edges {
        return Ok(e as f64);
    }
    match cfg.known_nodes {
        Some(n) => Ok(n as f64 * estimate_average_degree(trace) / 2.0),
        None => Err(Error::Input(
            "traversed-edge JDD needs a known edge count or node count".into(),
        )),
    }
}

/// Hybrid random-walk estimate: traversed edges for `k < k̄`
/// (`k + l < 2k̄` for the JDD), induced edges otherwise. A value only one
/// base estimator produced is used as is.
pub fn estimate_hybrid(trace: &SampleTrace, cfg: &EstimatorConfig) -> Result<EstimateBundle> {
    trace.expect_method(Method::Rw)?;
    let nodes = cfg
        .known_nodes
        .ok_or_else(|| Error::Input("hybrid estimation needs the node count".into()))?;
    if let Some(t) = cfg.hybrid_threshold {
        if !(t >= 0.0) {
            return Err(Error::Input(format!("hybrid threshold must be non-negative, got {t}")));
        }
    }
    let avg = estimate_average_degree(trace);
    let threshold = cfg.hybrid_threshold.unwrap_or(avg);
    let edges = resolve_edge_count(trace, cfg)?;

    let te_ck = estimate_ck_rw_traversed_detailed(trace)?;
    let ie_ck = estimate_ck_rw_induced_detailed(trace, cfg.margin)?;
    let te_jdd = estimate_jdd_rw_traversed(trace, edges)?;
    let ie_jdd = estimate_jdd_rw_induced(trace, cfg.margin, nodes)?;

    let mut diag = Diagnostics {
        average_degree: avg,
        edges_used: edges,
        ..Default::default()
    };
    for r in &trace.records {
        diag.support.entry(r.degree).or_default().samples += 1;
    }
    for (&k, &s) in &te_ck.support {
        diag.support.entry(k).or_default().traversed = s;
    }
    for (&k, &s) in &ie_ck.support {
        diag.support.entry(k).or_default().induced = s;
    }

    let mut ck = DegreeClustering::new();
    let mut ck_degrees: Vec<usize> = te_ck.ck.degrees().chain(ie_ck.ck.degrees()).collect();
    ck_degrees.sort_unstable();
    ck_degrees.dedup();
    for k in ck_degrees {
        let prefer_te = (k as f64) < threshold;
        let (value, source) = match (te_ck.ck.get(k), ie_ck.ck.get(k)) {
            (Some(t), Some(i)) => {
                if prefer_te {
                    (t, Source::Traversed)
                } else {
                    (i, Source::Induced)
                }
            }
            (Some(t), None) => {
                debug!("c(k={k}): induced estimate missing, using traversed");
                (t, Source::Traversed)
            }
            (None, Some(i)) => {
                debug!("c(k={k}): traversed estimate missing, using induced");
                (i, Source::Induced)
            }
            (None, None) => unreachable!(),
        };
        ck.insert(k, value);
        diag.support.entry(k).or_default().ck_source = Some(source);
    }
    for k in te_ck.clamped.iter().chain(&ie_ck.clamped) {
        if diag.support.get(k).and_then(|s| s.ck_source).is_some() {
            let s = diag.support.get_mut(k).unwrap();
            if !s.clamped {
                s.clamped = true;
                diag.clamped += 1;
            }
        }
    }
    diag.omitted_ck = diag
        .support
        .keys()
        .copied()
        .filter(|&k| k >= 2 && !ck.contains(k))
        .collect();

    let mut jdd = RealJdd::new();
    let mut keys: Vec<(usize, usize)> = te_jdd.iter().chain(ie_jdd.iter()).map(|(k, _)| k).collect();
    keys.sort_unstable();
    keys.dedup();
    for (k, l) in keys {
        let te = te_jdd.get(k, l);
        let ie = ie_jdd.get(k, l);
        let prefer_te = ((k + l) as f64) < 2.0 * threshold;
        let v = match (te > 0.0, ie > 0.0) {
            (true, true) => {
                if prefer_te {
                    te
                } else {
                    ie
                }
            }
            (true, false) => te,
            _ => ie,
        };
        store_pair(&mut jdd, k, l, v);
    }

    let vk = degree_fractions_weighted(trace)
        .into_iter()
        .map(|(k, f)| (k, f * nodes as f64))
        .collect();

    Ok(EstimateBundle {
        jdd,
        ck,
        vk,
        diagnostics: diag,
    })
}

/// Method-appropriate estimate: the hybrid for walks, the induced-edge
/// estimators for independence samples.
pub fn estimate(trace: &SampleTrace, cfg: &EstimatorConfig) -> Result<EstimateBundle> {
    match trace.method {
        Method::Rw => estimate_hybrid(trace, cfg),
        Method::Uis | Method::Wis => {
            let nodes = cfg
                .known_nodes
                .ok_or_else(|| Error::Input("JDD estimation needs the node count".into()))?;
            let (ckest, jdd, frac) = if trace.method == Method::Uis {
                let mut per: BTreeMap<usize, f64> = BTreeMap::new();
                for r in &trace.records {
                    *per.entry(r.degree).or_insert(0.0) += 1.0 / trace.len() as f64;
                }
                (estimate_ck_uis_detailed(trace)?, estimate_jdd_uis(trace, nodes)?, per)
            } else {
                (
                    estimate_ck_wis_detailed(trace)?,
                    estimate_jdd_wis(trace, nodes)?,
                    degree_fractions_weighted(trace),
                )
            };
            let mut diag = Diagnostics {
                average_degree: frac.iter().map(|(&k, f)| k as f64 * f).sum(),
                ..Default::default()
            };
            for r in &trace.records {
                diag.support.entry(r.degree).or_default().samples += 1;
            }
            for (&k, &s) in &ckest.support {
                diag.support.entry(k).or_default().induced = s;
            }
            for &k in &ckest.clamped {
                diag.support.entry(k).or_default().clamped = true;
                diag.clamped += 1;
            }
            for k in ckest.ck.degrees() {
                diag.support.entry(k).or_default().ck_source = Some(Source::Induced);
            }
            diag.omitted_ck = ckest.omitted.clone();
            diag.edges_used = jdd.total_mass();
            Ok(EstimateBundle {
                jdd,
                ck: ckest.ck,
                vk: frac.into_iter().map(|(k, f)| (k, f * nodes as f64)).collect(),
                diagnostics: diag,
            })
        }
    }
}

impl EstimateBundle {
    /// Writes `jdd.txt`, `ck.txt`, `vk.txt` and `diagnostics.txt` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut w = create(&dir.join("jdd.txt"))?;
        write_jdd_lines(&self.jdd, &mut w)?;
        w.flush()?;
        let mut w = create(&dir.join("ck.txt"))?;
        write_ck_lines(&self.ck, &mut w)?;
        w.flush()?;
        let mut w = create(&dir.join("vk.txt"))?;
        for (k, v) in &self.vk {
            writeln!(w, "{k} {v}")?;
        }
        w.flush()?;
        let mut w = create(&dir.join("diagnostics.txt"))?;
        self.write_diagnostics(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_diagnostics<W: Write>(&self, w: &mut W) -> Result<()> {
        let d = &self.diagnostics;
        writeln!(w, "# average_degree {}", d.average_degree)?;
        writeln!(w, "# edges_used {}", d.edges_used)?;
        writeln!(w, "# clamped {}", d.clamped)?;
        let omitted: Vec<String> = d.omitted_ck.iter().map(|k| k.to_string()).collect();
        writeln!(w, "# omitted_ck {}", omitted.join(","))?;
        writeln!(w, "# degree samples traversed induced source clamped")?;
        for (k, s) in &d.support {
            let src = match s.ck_source {
                Some(Source::Traversed) => "te",
                Some(Source::Induced) => "ie",
                None => "-",
            };
            writeln!(
                w,
                "{k} {} {} {} {src} {}",
                s.samples, s.traversed, s.induced, s.clamped as u8
            )?;
        }
        Ok(())
    }

    /// Reads the JDD and `ĉ(k)` back from a directory written by
    /// [`EstimateBundle::write_dir`]. Diagnostics are not restored.
    pub fn read_dir(dir: &Path) -> Result<Self> {
        let jdd = crate::io::read_jdd_file(&dir.join("jdd.txt"))?;
        let ck = crate::io::read_ck_file(&dir.join("ck.txt"))?;
        let mut vk = BTreeMap::new();
        let vk_path = dir.join("vk.txt");
        if vk_path.exists() {
            let label = vk_path.display().to_string();
            for item in crate::io::content_lines(crate::io::open(&vk_path)?) {
                let (no, line) = item?;
                let mut it = line.split_whitespace();
                let k: usize = crate::io::parse_field(it.next(), &label, no, "degree")?;
                let v: f64 = crate::io::parse_field(it.next(), &label, no, "count")?;
                vk.insert(k, v);
            }
        }
        Ok(EstimateBundle {
            jdd,
            ck,
            vk,
            diagnostics: Diagnostics::default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named::*;
    use crate::graph::Graph;
    use crate::sampling::{sample_rw, RwOptions};

    fn full(g: &Graph, m: Method) -> SampleTrace {
        let nodes: Vec<usize> = (0..g.node_count()).collect();
        SampleTrace::from_nodes(g, m, 0, &nodes)
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn uis_ck_full_coverage() {
        let ck = estimate_ck_uis(&full(&complete(3), Method::Uis)).unwrap();
        assert_eq!(ck.get(2), Some(1.0));
        let ck = estimate_ck_uis(&full(&cycle(4), Method::Uis)).unwrap();
        assert_eq!(ck.get(2), Some(0.0));
        let ck = estimate_ck_uis(&full(&diamond(), Method::Uis)).unwrap();
        assert!(close(ck.get(3).unwrap(), 2.0 / 3.0));
        assert!(close(ck.get(2).unwrap(), 1.0));
    }

    #[test]
    fn wis_ck_small_graphs() {
        let ck = estimate_ck_wis(&full(&complete(3), Method::Wis)).unwrap();
        assert_eq!(ck.get(2), Some(1.0));
        let ck = estimate_ck_wis(&full(&star(5), Method::Wis)).unwrap();
        assert!(ck.iter().all(|(_, c)| c == 0.0));
    }

    #[test]
    fn method_is_checked() {
        let t = full(&complete(3), Method::Uis);
        assert!(matches!(estimate_ck_wis(&t), Err(Error::WrongMethod { .. })));
        assert!(estimate_ck_rw_traversed(&t).is_err());
    }

    #[test]
    fn uis_jdd_full_coverage() {
        let j = estimate_jdd_uis(&full(&complete(3), Method::Uis), 3).unwrap();
        assert_eq!(j.len(), 1);
        assert!(close(j.get(2, 2), 3.0));
        let j = estimate_jdd_uis(&full(&star(4), Method::Uis), 4).unwrap();
        assert_eq!(j.len(), 1);
        assert!(close(j.get(1, 3), 3.0));
    }

    #[test]
    fn rw_margin_covering_the_trace_gives_nothing() {
        let g = complete(5);
        let t = sample_rw(&g, 30, 1, RwOptions::default()).unwrap();
        assert!(estimate_ck_rw_induced(&t, 30).unwrap().is_empty());
        assert!(estimate_jdd_rw_induced(&t, 30, 5).unwrap().is_empty());
    }

    #[test]
    fn rw_k3_estimates() {
        let g = complete(3);
        let t = sample_rw(&g, 10_000, 3, RwOptions::default()).unwrap();
        assert_eq!(estimate_ck_rw_induced(&t, 10).unwrap().get(2), Some(1.0));
        assert_eq!(estimate_ck_rw_traversed(&t).unwrap().get(2), Some(1.0));
        let te = estimate_jdd_rw_traversed(&t, 3.0).unwrap();
        assert!(close(te.get(2, 2), 3.0));
        // Induced pairs include revisits of the same node, so the estimate is
        // exact only in expectation.
        let ie = estimate_jdd_rw_induced(&t, 10, 3).unwrap();
        assert!((ie.get(2, 2) - 3.0).abs() < 0.05, "{}", ie.get(2, 2));
    }

    #[test]
    fn rw_star_traversed_jdd() {
        let g = star(4);
        let t = sample_rw(&g, 1000, 3, RwOptions::default()).unwrap();
        let te = estimate_jdd_rw_traversed(&t, 3.0).unwrap();
        assert_eq!(te.len(), 1);
        assert!(close(te.get(1, 3), 3.0));
    }

    #[test]
    fn tree_walk_has_no_clustering() {
        let g = Graph::from_edges(7, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]);
        let t = sample_rw(&g, 2000, 8, RwOptions::default()).unwrap();
        let ck = estimate_ck_rw_traversed(&t).unwrap();
        assert!(!ck.is_empty());
        assert!(ck.iter().all(|(_, c)| c == 0.0));
    }

    #[test]
    fn margin_zero_reduces_to_wis() {
        let g = crate::synth::holme_kim(200, 3, 0.6, 4);
        let t = sample_rw(&g, 3000, 2, RwOptions::default()).unwrap();
        let ie = estimate_ck_rw_induced(&t, 0).unwrap();
        let wis = ck_wis_unchecked(&t).ck;
        assert_eq!(ie.len(), wis.len());
        for (k, c) in ie.iter() {
            assert!((c - wis.get(k).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn hybrid_on_k3_matches_both() {
        let g = complete(3);
        let t = sample_rw(&g, 5000, 3, RwOptions::default()).unwrap();
        let cfg = EstimatorConfig {
            known_nodes: Some(3),
            known_edges: Some(3),
            margin: 10,
            ..Default::default()
        };
        let b = estimate_hybrid(&t, &cfg).unwrap();
        assert_eq!(b.ck.get(2), Some(1.0));
        assert!(close(b.vk[&2], 3.0));
    }

    #[test]
    fn hybrid_zero_threshold_is_induced() {
        let g = crate::synth::holme_kim(300, 3, 0.5, 9);
        let t = sample_rw(&g, 3000, 5, RwOptions::default()).unwrap();
        let cfg = EstimatorConfig {
            known_nodes: Some(300),
            hybrid_threshold: Some(0.0),
            margin: 20,
            ..Default::default()
        };
        let b = estimate_hybrid(&t, &cfg).unwrap();
        let ie = estimate_ck_rw_induced(&t, 20).unwrap();
        for (k, c) in ie.iter() {
            assert_eq!(b.ck.get(k), Some(c));
        }
        let ij = estimate_jdd_rw_induced(&t, 20, 300).unwrap();
        for ((k, l), v) in ij.iter() {
            assert_eq!(b.jdd.get(k, l), v);
        }
    }

    #[test]
    fn hybrid_requires_node_count() {
        let t = sample_rw(&complete(4), 100, 1, RwOptions::default()).unwrap();
        assert!(estimate_hybrid(&t, &EstimatorConfig::default()).is_err());
    }

    #[test]
    fn average_degree_is_harmonic() {
        let g = star(5);
        let t = full(&g, Method::Rw);
        // Degrees 4,1,1,1,1: 5 / (1/4 + 4) = 20/17.
        assert!(close(estimate_average_degree(&t), 20.0 / 17.0));
    }

    #[test]
    fn bundle_dir_round_trip() {
        let g = crate::synth::holme_kim(100, 2, 0.5, 1);
        let t = sample_rw(&g, 500, 5, RwOptions::default()).unwrap();
        let cfg = EstimatorConfig {
            known_nodes: Some(100),
            ..Default::default()
        };
        let b = estimate(&t, &cfg).unwrap();
        let dir = std::env::temp_dir().join(format!("dk25-bundle-{}", std::process::id()));
        b.write_dir(&dir).unwrap();
        let back = EstimateBundle::read_dir(&dir).unwrap();
        assert_eq!(back.jdd, b.jdd);
        assert_eq!(back.ck, b.ck);
        assert_eq!(back.vk, b.vk);
        std::fs::remove_dir_all(dir).ok();
    }
}
