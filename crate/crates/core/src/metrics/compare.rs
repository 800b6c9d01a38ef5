//! Side-by-side comparison of a reference and a generated graph.
//!
//! Every metric is computed on both graphs concurrently, one scoped thread
//! per (metric, graph) job. NMAE is taken on the raw keys; histogram-type
//! metrics are first rescaled to proportions so graphs of different sizes
//! compare by shape. The 30-interval binning is for plotting only.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use super::cycles::{cycle_basis_distribution, CycleBasisOptions, CycleBasisOutcome};
use super::{basic, cliques, nmae, nmae_abs, normalized, paths, spectrum, Distribution};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::io::create;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Dd,
    Knn,
    Jdd,
    Cc,
    Esp,
    ShortestPaths,
    Cliques,
    CycleBasis,
    Spectrum,
    Closeness,
}

impl Metric {
    pub const ALL: [Metric; 10] = [
        Metric::Dd,
        Metric::Knn,
        Metric::Jdd,
        Metric::Cc,
        Metric::Esp,
        Metric::ShortestPaths,
        Metric::Cliques,
        Metric::CycleBasis,
        Metric::Spectrum,
        Metric::Closeness,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Metric::Dd => "DD",
            Metric::Knn => "Knn",
            Metric::Jdd => "JDD",
            Metric::Cc => "CC",
            Metric::Esp => "ESP",
            Metric::ShortestPaths => "Sh.P.",
            Metric::Cliques => "Cliq.",
            Metric::CycleBasis => "Cycles",
            Metric::Spectrum => "Spect.",
            Metric::Closeness => "Close.",
        }
    }

    /// File-name friendly identifier.
    pub fn slug(self) -> &'static str {
        match self {
            Metric::Dd => "dd",
            Metric::Knn => "knn",
            Metric::Jdd => "jdd",
            Metric::Cc => "cc",
            Metric::Esp => "esp",
            Metric::ShortestPaths => "shortest_paths",
            Metric::Cliques => "cliques",
            Metric::CycleBasis => "cycle_basis",
            Metric::Spectrum => "spectrum",
            Metric::Closeness => "closeness",
        }
    }

    /// Rescaled to unit mass before scoring.
    fn is_histogram(self) -> bool {
        matches!(
            self,
            Metric::Dd | Metric::Jdd | Metric::Esp | Metric::ShortestPaths | Metric::Cliques | Metric::CycleBasis
        )
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone)]
pub struct CompareOptions {
    /// BFS sources for paths and closeness; `None` means exact up to
    /// `exact_node_limit` nodes and `sampled_sources` above it.
    pub path_sources: Option<usize>,
    pub exact_node_limit: usize,
    pub sampled_sources: usize,
    pub clique_timeout: Option<Duration>,
    pub cycles: CycleBasisOptions,
    pub spectrum_count: usize,
    pub bins: usize,
    pub seed: u64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            path_sources: None,
            exact_node_limit: 5000,
            sampled_sources: 1000,
            clique_timeout: Some(Duration::from_secs(120)),
            cycles: CycleBasisOptions {
                timeout: Some(Duration::from_secs(120)),
                ..CycleBasisOptions::default()
            },
            spectrum_count: spectrum::SPECTRUM_COUNT,
            bins: 30,
            seed: 0,
        }
    }
}

impl CompareOptions {
    fn sources(&self, n: usize) -> usize {
        self.path_sources.unwrap_or(if n <= self.exact_node_limit {
            n
        } else {
            self.sampled_sources
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricStatus {
    Ok,
    TimedOut(String),
    Skipped(String),
    Failed(String),
}

impl MetricStatus {
    pub fn as_str(&self) -> &str {
        match self {
            MetricStatus::Ok => "ok",
            MetricStatus::TimedOut(_) => "timeout",
            MetricStatus::Skipped(_) => "skipped",
            MetricStatus::Failed(_) => "failed",
        }
    }
}

/// One plotting interval: `[lo, hi)` with the aggregated value of each graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub reference: f64,
    pub generated: f64,
}

#[derive(Debug, Clone)]
pub struct MetricResult {
    pub metric: Metric,
    pub nmae: Option<f64>,
    pub status: MetricStatus,
    /// Time spent on the reference and on the generated graph.
    pub runtime: [Duration; 2],
    /// Scored distributions, reference then generated. Empty for JDD, which
    /// is keyed by degree pairs and kept out of the 1-D plots.
    pub raw: [Distribution; 2],
    pub bins: Vec<Bin>,
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub results: Vec<MetricResult>,
    pub nodes: [usize; 2],
    pub edges: [usize; 2],
}

enum Value {
    Keyed(Distribution),
    Pairs(BTreeMap<(usize, usize), f64>),
}

fn evaluate(metric: Metric, g: &Graph, opts: &CompareOptions) -> Result<Value> {
    let sources = opts.sources(g.node_count());
    Ok(match metric {
        Metric::Dd => Value::Keyed(basic::degree_distribution(g)),
        Metric::Knn => Value::Keyed(basic::avg_neighbor_degree(g)),
        Metric::Jdd => Value::Pairs(basic::jdd_distribution(g)),
        Metric::Cc => Value::Keyed(g.degree_clustering().as_map().clone()),
        Metric::Esp => Value::Keyed(basic::edgewise_shared_partners(g)),
        Metric::ShortestPaths => Value::Keyed(paths::shortest_path_distribution(g, sources, opts.seed).counts),
        Metric::Cliques => Value::Keyed(cliques::maximal_cliques(g, opts.clique_timeout)?),
        Metric::CycleBasis => match cycle_basis_distribution(g, &opts.cycles)? {
            CycleBasisOutcome::Complete(h) => Value::Keyed(h),
            CycleBasisOutcome::Skipped { candidates } => {
                return Err(Error::Skipped {
                    metric: "cycle basis",
                    reason: format!("{candidates} candidate cycles exceed the bound"),
                })
            }
        },
        Metric::Spectrum => Value::Keyed(
            spectrum::spectrum_top(g, opts.spectrum_count)?
                .into_iter()
                .enumerate()
                .collect(),
        ),
        Metric::Closeness => {
            let c = paths::closeness_centrality(g, sources, opts.seed);
            Value::Keyed(paths::closeness_histogram(&c, opts.bins))
        }
    })
}

fn score<K: Ord + Clone>(metric: Metric, r: &BTreeMap<K, f64>, e: &BTreeMap<K, f64>) -> Result<f64> {
    if r == e {
        return Ok(0.0);
    }
    if metric == Metric::Spectrum {
        return nmae_abs(e, r);
    }
    if metric.is_histogram() {
        return nmae(&normalized(e), &normalized(r));
    }
    nmae(e, r)
}

/// `bins` equal-width intervals over the union of both key ranges.
fn bin(metric: Metric, r: &Distribution, e: &Distribution, bins: usize) -> Vec<Bin> {
    if metric == Metric::Closeness {
        // Keys already are interval indices over [0, 1].
        return (0..bins)
            .map(|i| Bin {
                lo: i as f64 / bins as f64,
                hi: (i + 1) as f64 / bins as f64,
                reference: r.get(&i).copied().unwrap_or(0.0),
                generated: e.get(&i).copied().unwrap_or(0.0),
            })
            .collect();
    }
    let keys = r.keys().chain(e.keys());
    let (Some(&min), Some(&max)) = (keys.clone().min(), keys.max()) else {
        return Vec::new();
    };
    let (min, max) = (min as f64, max as f64);
    let width = ((max - min) / bins as f64).max(f64::MIN_POSITIVE);
    let count = if max > min { bins } else { 1 };
    let index = |k: usize| (((k as f64 - min) / width) as usize).min(count - 1);
    let fold = |d: &Distribution| {
        let mut sum = vec![0.0; count];
        let mut n = vec![0usize; count];
        let d = if metric.is_histogram() { normalized(d) } else { d.clone() };
        for (&k, &v) in &d {
            sum[index(k)] += v;
            n[index(k)] += 1;
        }
        if !metric.is_histogram() {
            for (s, &c) in sum.iter_mut().zip(&n) {
                if c > 0 {
                    *s /= c as f64;
                }
            }
        }
        sum
    };
    let (a, b) = (fold(r), fold(e));
    (0..count)
        .map(|i| Bin {
            lo: min + i as f64 * width,
            hi: if count == 1 { max } else { min + (i + 1) as f64 * width },
            reference: a[i],
            generated: b[i],
        })
        .collect()
}

fn status_of(e: &Error) -> MetricStatus {
    match e {
        Error::Timeout { .. } => MetricStatus::TimedOut(e.to_string()),
        Error::Skipped { .. } => MetricStatus::Skipped(e.to_string()),
        _ => MetricStatus::Failed(e.to_string()),
    }
}

/// Computes every metric on both graphs and scores `g_gen` against `g_ref`.
/// Metric failures are recorded in the report, never returned.
pub fn compare(g_ref: &Graph, g_gen: &Graph, opts: &CompareOptions) -> Result<ComparisonReport> {
    if g_ref.node_count() == 0 || g_gen.node_count() == 0 {
        return Err(Error::Input("cannot compare an empty graph".into()));
    }
    let graphs = [g_ref, g_gen];
    let mut outputs: BTreeMap<(Metric, usize), (Result<Value>, Duration)> = std::thread::scope(|s| {
        let handles: Vec<_> = Metric::ALL
            .iter()
            .flat_map(|&m| (0..2).map(move |side| (m, side)))
            .map(|(m, side)| {
                let g = graphs[side];
                (
                    (m, side),
                    s.spawn(move || {
                        let t = Instant::now();
                        let v = evaluate(m, g, opts);
                        (v, t.elapsed())
                    }),
                )
            })
            .collect();
        handles
            .into_iter()
            .map(|(key, h)| (key, h.join().expect("metric worker panicked")))
            .collect()
    });
    let mut results = Vec::with_capacity(Metric::ALL.len());
    for m in Metric::ALL {
        let (r, tr) = outputs.remove(&(m, 0)).unwrap();
        let (e, te) = outputs.remove(&(m, 1)).unwrap();
        let mut res = MetricResult {
            metric: m,
            nmae: None,
            status: MetricStatus::Ok,
            runtime: [tr, te],
            raw: [Distribution::new(), Distribution::new()],
            bins: Vec::new(),
        };
        let scored = match (r, e) {
            (Ok(Value::Keyed(r)), Ok(Value::Keyed(e))) => {
                let s = score(m, &r, &e);
                res.bins = bin(m, &r, &e, opts.bins);
                res.raw = [r, e];
                s
            }
            (Ok(Value::Pairs(r)), Ok(Value::Pairs(e))) => score(m, &r, &e),
            (Err(x), _) | (_, Err(x)) => Err(x),
            _ => unreachable!("both sides of a metric share a value shape"),
        };
        match scored {
            Ok(v) => res.nmae = Some(v),
            Err(x) => res.status = status_of(&x),
        }
        results.push(res);
    }
    Ok(ComparisonReport {
        results,
        nodes: [g_ref.node_count(), g_gen.node_count()],
        edges: [g_ref.edge_count(), g_gen.edge_count()],
    })
}

impl ComparisonReport {
    pub fn get(&self, m: Metric) -> &MetricResult {
        self.results.iter().find(|r| r.metric == m).expect("every metric is reported")
    }

    pub fn nmae(&self, m: Metric) -> Option<f64> {
        self.get(m).nmae
    }

    /// Human-readable table, one row per metric.
    pub fn write_table<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "reference: {} nodes / {} edges; generated: {} nodes / {} edges",
            self.nodes[0], self.edges[0], self.nodes[1], self.edges[1]
        )?;
        writeln!(w, "{:<8} {:>10} {:>9} {:>10} {:>10}", "metric", "NMAE", "status", "ref ms", "gen ms")?;
        for r in &self.results {
            let v = r.nmae.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
            writeln!(
                w,
                "{:<8} {:>10} {:>9} {:>10} {:>10}",
                r.metric.label(),
                v,
                r.status.as_str(),
                r.runtime[0].as_millis(),
                r.runtime[1].as_millis()
            )?;
        }
        for r in &self.results {
            if let MetricStatus::TimedOut(m) | MetricStatus::Skipped(m) | MetricStatus::Failed(m) = &r.status {
                writeln!(w, "note: {}: {m}", r.metric.label())?;
            }
        }
        Ok(())
    }

    /// `metric,nmae,status,ref_ms,gen_ms`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "metric,nmae,status,ref_ms,gen_ms")?;
        for r in &self.results {
            writeln!(
                w,
                "{},{},{},{:.3},{:.3}",
                r.metric.label(),
                r.nmae.map_or_else(String::new, |x| format!("{x}")),
                r.status.as_str(),
                r.runtime[0].as_secs_f64() * 1e3,
                r.runtime[1].as_secs_f64() * 1e3
            )?;
        }
        Ok(())
    }

    /// One `bins_<metric>.csv` per binned metric under `dir`.
    pub fn write_bins(&self, dir: &Path) -> Result<()> {
        for r in self.results.iter().filter(|r| !r.bins.is_empty()) {
            let mut w = create(&dir.join(format!("bins_{}.csv", r.metric.slug())))?;
            writeln!(w, "lo,hi,reference,generated")?;
            for b in &r.bins {
                writeln!(w, "{},{},{},{}", b.lo, b.hi, b.reference, b.generated)?;
            }
        }
        Ok(())
    }
}
