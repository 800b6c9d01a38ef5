//! Node samplers that emulate what a crawler observes: uniform and
//! degree-weighted independence sampling, and the simple random walk.
//!
//! Every visited node reveals its full neighbor list. Traces are fully
//! determined by `(graph, n, seed, method)`.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::io::{content_lines, create, open, parse_err, parse_field};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Uis,
    Wis,
    Rw,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Uis => "uis",
            Method::Wis => "wis",
            Method::Rw => "rw",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uis" => Ok(Method::Uis),
            "wis" => Ok(Method::Wis),
            "rw" => Ok(Method::Rw),
            other => Err(Error::Input(format!("unknown sampling method {other:?}"))),
        }
    }
}

/// One visit: the node, its degree and its revealed neighbor list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleRecord {
    pub node: NodeId,
    pub degree: usize,
    /// Ascending.
    pub neighbors: Vec<NodeId>,
}

impl SampleRecord {
    pub fn observe(g: &Graph, v: NodeId) -> Self {
        SampleRecord {
            node: v,
            degree: g.degree(v),
            neighbors: g.neighbors(v).to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleTrace {
    pub method: Method,
    pub seed: u64,
    pub records: Vec<SampleRecord>,
}

/// The RNG every seeded stage uses.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of `seed`; used to give repeated runs and
/// pipeline stages non-overlapping randomness.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sample length for a percentage of `nodes`: `ceil(pct · N / 100)`.
pub fn sample_length(pct: f64, nodes: usize) -> usize {
    ((pct * nodes as f64 / 100.0) - 1e-9).ceil().max(1.0) as usize
}

impl SampleTrace {
    /// A trace visiting `nodes` in the given order.
    pub fn from_nodes(g: &Graph, method: Method, seed: u64, nodes: &[NodeId]) -> Self {
        SampleTrace {
            method,
            seed,
            records: nodes.iter().map(|&v| SampleRecord::observe(g, v)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn expect_method(&self, expected: Method) -> Result<()> {
        if self.method == expected {
            Ok(())
        } else {
            Err(Error::WrongMethod {
                expected: expected.as_str(),
                found: self.method.as_str(),
            })
        }
    }

    /// Visits per node id (indexed up to the largest id seen).
    pub fn visit_counts(&self) -> Vec<usize> {
        let max = self
            .records
            .iter()
            .flat_map(|r| std::iter::once(r.node).chain(r.neighbors.iter().copied()))
            .max()
            .map_or(0, |m| m + 1);
        let mut c = vec![0; max];
        for r in &self.records {
            c[r.node] += 1;
        }
        c
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {} {}", self.method, self.seed, self.records.len())?;
        for r in &self.records {
            write!(w, "{} {} ", r.node, r.degree)?;
            for (i, b) in r.neighbors.iter().enumerate() {
                if i > 0 {
                    w.write_all(b",")?;
                }
                write!(w, "{b}")?;
            }
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R, label: &str) -> Result<Self> {
        let mut lines = content_lines(reader);
        let (no, header) = lines
            .next()
            .ok_or_else(|| parse_err(label, 1, "empty trace file"))??;
        let mut h = header.split_whitespace();
        let method: Method = parse_field(h.next(), label, no, "method")?;
        let seed: u64 = parse_field(h.next(), label, no, "seed")?;
        let n: usize = parse_field(h.next(), label, no, "record count")?;
        let mut records = Vec::with_capacity(n);
        for item in lines {
            let (no, line) = item?;
            let mut it = line.split_whitespace();
            let node: NodeId = parse_field(it.next(), label, no, "node")?;
            let degree: usize = parse_field(it.next(), label, no, "degree")?;
            let neighbors: Vec<NodeId> = match it.next() {
                None => Vec::new(),
                Some(list) => list
                    .split(',')
                    .map(|t| parse_field(Some(t), label, no, "neighbor"))
                    .collect::<Result<_>>()?,
            };
            if neighbors.len() != degree {
                return Err(parse_err(label, no, "degree does not match neighbor list"));
            }
            if neighbors.windows(2).any(|w| w[0] >= w[1]) || neighbors.contains(&node) {
                return Err(parse_err(
                    label,
                    no,
                    "neighbor list must be ascending, duplicate-free and exclude the node",
                ));
            }
            records.push(SampleRecord {
                node,
                degree,
                neighbors,
            });
        }
        if records.len() != n {
            return Err(parse_err(
                label,
                0,
                format!("header announces {n} records, found {}", records.len()),
            ));
        }
        Ok(SampleTrace {
            method,
            seed,
            records,
        })
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        self.write(create(path)?)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        Self::read(open(path)?, &path.display().to_string())
    }
}

/// `n` nodes drawn uniformly with replacement.
pub fn sample_uis(g: &Graph, n: usize, seed: u64) -> Result<SampleTrace> {
    if g.is_empty() {
        return Err(Error::Input("cannot sample an empty graph".into()));
    }
    if n == 0 {
        return Err(Error::Input("sample length must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let nodes: Vec<NodeId> = (0..n).map(|_| rng.random_range(0..g.node_count())).collect();
    Ok(SampleTrace::from_nodes(g, Method::Uis, seed, &nodes))
}

/// `n` nodes drawn with replacement, node `v` with probability
/// `deg(v) / 2|E|`.
pub fn sample_wis(g: &Graph, n: usize, seed: u64) -> Result<SampleTrace> {
    if n == 0 {
        return Err(Error::Input("sample length must be at least 1".into()));
    }
    if g.edge_count() == 0 {
        return Err(Error::Input("weighted sampling needs at least one edge".into()));
    }
    // Drawing a uniform stub and taking its owner gives exactly deg(v)/2|E|.
    let mut owner = Vec::with_capacity(2 * g.edge_count());
    for v in 0..g.node_count() {
        owner.extend(std::iter::repeat_n(v, g.degree(v)));
    }
    let mut rng = rng_from_seed(seed);
    let nodes: Vec<NodeId> = (0..n).map(|_| owner[rng.random_range(0..owner.len())]).collect();
    Ok(SampleTrace::from_nodes(g, Method::Wis, seed, &nodes))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RwOptions {
    /// Start node; uniform among non-isolated nodes when `None`.
    pub start: Option<NodeId>,
    /// Steps walked and discarded before recording.
    pub burn_in: usize,
}

/// Simple random walk of `n` recorded visits.
pub fn sample_rw(g: &Graph, n: usize, seed: u64, opts: RwOptions) -> Result<SampleTrace> {
    if n == 0 {
        return Err(Error::Input("sample length must be at least 1".into()));
    }
    if g.edge_count() == 0 {
        return Err(Error::Input("random walk needs at least one edge".into()));
    }
    let mut rng = rng_from_seed(seed);
    let start = match opts.start {
        Some(s) => {
            if s >= g.node_count() {
                return Err(Error::NodeOutOfRange {
                    node: s,
                    nodes: g.node_count(),
                });
            }
            if g.degree(s) == 0 {
                return Err(Error::Input(format!("random walk cannot start at isolated node {s}")));
            }
            s
        }
        None => {
            let candidates: Vec<NodeId> = (0..g.node_count()).filter(|&v| g.degree(v) > 0).collect();
            candidates[rng.random_range(0..candidates.len())]
        }
    };
    if !g.is_connected() {
        warn!("graph is disconnected; the walk stays inside the component of node {start}");
    }
    let mut cur = start;
    for _ in 0..opts.burn_in {
        let nb = g.neighbors(cur);
        cur = nb[rng.random_range(0..nb.len())];
    }
    let mut nodes = Vec::with_capacity(n);
    nodes.push(cur);
    for _ in 1..n {
        let nb = g.neighbors(cur);
        cur = nb[rng.random_range(0..nb.len())];
        nodes.push(cur);
    }
    Ok(SampleTrace::from_nodes(g, Method::Rw, seed, &nodes))
}

/// Dispatches on `method`; the random walk uses default options.
pub fn sample(g: &Graph, method: Method, n: usize, seed: u64) -> Result<SampleTrace> {
    match method {
        Method::Uis => sample_uis(g, n, seed),
        Method::Wis => sample_wis(g, n, seed),
        Method::Rw => sample_rw(g, n, seed, RwOptions::default()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named::*;

    /// |x - np| <= 3 sqrt(np(1-p))
    fn within_3_sigma(count: usize, n: usize, p: f64) -> bool {
        let mean = n as f64 * p;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        (count as f64 - mean).abs() <= 3.0 * sd
    }

    #[test]
    fn uis_is_uniform_on_k3() {
        let t = sample_uis(&complete(3), 1000, 1).unwrap();
        let c = t.visit_counts();
        for v in 0..3 {
            assert!(within_3_sigma(c[v], 1000, 1.0 / 3.0), "{c:?}");
        }
    }

    #[test]
    fn uis_trivial_cases() {
        assert_eq!(sample_uis(&complete(4), 1, 3).unwrap().len(), 1);
        let t = sample_uis(&Graph::new(1), 5, 3).unwrap();
        assert_eq!(t.len(), 5);
        assert!(t.records.iter().all(|r| r.node == 0 && r.neighbors.is_empty()));
        assert!(sample_uis(&Graph::new(0), 5, 3).is_err());
    }

    #[test]
    fn wis_follows_degrees() {
        let t = sample_wis(&star(4), 3000, 2).unwrap();
        assert!(within_3_sigma(t.visit_counts()[0], 3000, 0.5));
        let t = sample_wis(&complete(3), 3000, 2).unwrap();
        let c = t.visit_counts();
        assert!((0..3).all(|v| within_3_sigma(c[v], 3000, 1.0 / 3.0)));
        let t = sample_wis(&path(3), 4000, 2).unwrap();
        assert!(within_3_sigma(t.visit_counts()[1], 4000, 0.5));
        assert!(sample_wis(&Graph::new(3), 10, 1).is_err());
    }

    #[test]
    fn rw_frequencies_and_adjacency() {
        let t = sample_rw(&complete(3), 10_000, 5, RwOptions::default()).unwrap();
        let c = t.visit_counts();
        assert!((0..3).all(|v| within_3_sigma(c[v], 10_000, 1.0 / 3.0)), "{c:?}");

        // On a path the walk is periodic, so visits to the middle node
        // alternate exactly; the frequency is 1/2 up to one visit.
        let t = sample_rw(&path(3), 10_000, 5, RwOptions::default()).unwrap();
        let mid = t.visit_counts()[1] as i64;
        assert!((mid - 5000).abs() <= 1);

        for w in t.records.windows(2) {
            assert!(w[0].neighbors.contains(&w[1].node));
        }
    }

    #[test]
    fn rw_rejects_isolated_start() {
        let g = Graph::from_edges(3, [(0, 1)]);
        let opts = RwOptions {
            start: Some(2),
            burn_in: 0,
        };
        assert!(sample_rw(&g, 10, 1, opts).is_err());
    }

    #[test]
    fn rw_on_disconnected_graph_stays_in_component() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (3, 4)]);
        let opts = RwOptions {
            start: Some(3),
            burn_in: 3,
        };
        let t = sample_rw(&g, 100, 1, opts).unwrap();
        assert!(t.records.iter().all(|r| r.node == 3 || r.node == 4));
    }

    #[test]
    fn traces_are_deterministic() {
        let g = cycle(10);
        for m in [Method::Uis, Method::Wis, Method::Rw] {
            assert_eq!(sample(&g, m, 50, 9).unwrap(), sample(&g, m, 50, 9).unwrap());
        }
        assert_ne!(sample_uis(&g, 50, 9).unwrap(), sample_uis(&g, 50, 10).unwrap());
    }

    #[test]
    fn trace_file_round_trip_is_bit_exact() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 0), (2, 3)]);
        let t = sample_uis(&g, 40, 4).unwrap();
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        let back = SampleTrace::read(buf.as_slice(), "mem").unwrap();
        assert_eq!(back, t);
        let mut again = Vec::new();
        back.write(&mut again).unwrap();
        assert_eq!(buf, again);
        assert!(String::from_utf8(buf).unwrap().starts_with("uis 4 40\n"));
    }

    #[test]
    fn trace_reader_validates_records() {
        assert!(SampleTrace::read("rw 1 1\n0 2 1\n".as_bytes(), "mem").is_err());
        assert!(SampleTrace::read("rw 1 2\n0 1 1\n".as_bytes(), "mem").is_err());
        assert!(SampleTrace::read("rw 1 1\n0 1 0\n".as_bytes(), "mem").is_err());
        assert!(SampleTrace::read("xx 1 1\n0 1 1\n".as_bytes(), "mem").is_err());
    }

    #[test]
    fn sample_length_rounds_up() {
        assert_eq!(sample_length(20.0, 1000), 200);
        assert_eq!(sample_length(1.0, 150), 2);
        assert_eq!(sample_length(0.01, 10), 1);
        assert_eq!(sample_length(100.0, 3), 3);
    }
}
