//! Stage runners. Every stage reads plain-text inputs and writes its
//! outputs into the run directory under fixed names, so the output
//! directory of one stage is a valid `--input` for the next.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};

use dk25::estimation::{estimate, EstimateBundle};
use dk25::generation::{generate, write_trace_csv, Generated, Start, Variant};
use dk25::io::{read_edge_list_file, write_edge_list_file};
use dk25::metrics::{compare, ComparisonReport, Metric};
use dk25::postprocess::{postprocess, TargetSpec};
use dk25::sampling::{sample, sample_length, SampleTrace};
use dk25::Graph;

use crate::config::{read_pairs, write_pairs, Pairs, PipelineConfig};

pub const TRACE: &str = "trace.txt";
pub const SAMPLE_META: &str = "sample_meta.txt";
/// Directory holding the estimate's `jdd.txt`, `ck.txt`, `vk.txt` and `diagnostics.txt`.
pub const ESTIMATE: &str = "estimate";
pub const SPEC: &str = "spec.txt";
pub const POSTPROCESS: &str = "postprocess.txt";
pub const TIMING: &str = "timing.csv";
pub const MANIFEST: &str = "manifest.txt";
pub const AGGREGATE: &str = "aggregate.csv";

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or unreadable input; nothing was run.
    Validation(String),
    Stage { stage: &'static str, msg: String },
    /// Outputs were written, but the chain missed its stopping threshold.
    NotConverged(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Stage { .. } => 3,
            CliError::NotConverged(_) => 4,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Stage { stage, msg } => write!(f, "{stage} stage failed: {msg}"),
            CliError::NotConverged(p) => write!(f, "generator did not converge: {}", p.join(", ")),
        }
    }
}

pub fn invalid(e: impl Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn failed(stage: &'static str) -> impl Fn(dk25::Error) -> CliError {
    move |e| CliError::Stage { stage, msg: e.to_string() }
}

fn io_failed(stage: &'static str) -> impl Fn(std::io::Error) -> CliError {
    move |e| CliError::Stage { stage, msg: e.to_string() }
}

/// Timings and results of one invocation, written to the manifest.
#[derive(Debug, Default)]
pub struct Record {
    pub pairs: Pairs,
    pub unconverged: Vec<String>,
}

impl Record {
    pub fn set(&mut self, key: impl Into<String>, value: impl Display) {
        self.pairs.insert(format!("result.{}", key.into()), value.to_string());
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.pairs
            .insert(format!("timing.{stage}_ms"), t.elapsed().as_millis().to_string());
        out
    }

    pub fn write_manifest(&self, cfg: &PipelineConfig, command: &str) -> std::io::Result<()> {
        let mut pairs = cfg.to_pairs();
        pairs.insert("command".into(), command.into());
        pairs.insert("version".into(), format!("dk25 {}", env!("CARGO_PKG_VERSION")));
        pairs.extend(self.pairs.clone());
        fs::create_dir_all(&cfg.out)?;
        write_pairs(&pairs, &cfg.out.join(MANIFEST))
    }
}

/// `path`, or `path/name` when `path` is a directory.
fn locate(path: &Path, name: &str) -> PathBuf {
    if path.is_dir() {
        path.join(name)
    } else {
        path.to_path_buf()
    }
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    path.parent().unwrap_or(Path::new(".")).join(name)
}

fn must_exist(path: &Path) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(invalid(format!("{} does not exist", path.display())))
    }
}

pub fn input(cfg: &PipelineConfig) -> Result<&Path, CliError> {
    let p = cfg.input.as_deref().ok_or_else(|| invalid("--input is required"))?;
    must_exist(p)?;
    Ok(p)
}

/// Reads an edge list, optionally keeping only its largest component.
pub fn load_graph(path: &Path, largest_component: bool) -> Result<Graph, CliError> {
    let loaded = read_edge_list_file(path).map_err(invalid)?;
    let g = loaded.graph;
    if !largest_component || g.is_connected() {
        return Ok(g);
    }
    let (lcc, _) = g.largest_component();
    warn!(
        "{}: keeping the largest component ({} of {} nodes)",
        path.display(),
        lcc.node_count(),
        g.node_count()
    );
    Ok(lcc)
}

fn out_path(cfg: &PipelineConfig, name: &str) -> PathBuf {
    cfg.out.join(name)
}

pub fn sample_stage(cfg: &PipelineConfig, g: &Graph, rec: &mut Record) -> Result<SampleTrace, CliError> {
    let n = sample_length(cfg.pct, g.node_count());
    let trace = rec
        .timed("sample", || sample(g, cfg.method, n, cfg.seed))
        .map_err(failed("sample"))?;
    trace.write_file(&out_path(cfg, TRACE)).map_err(failed("sample"))?;
    let meta: Pairs = [
        ("nodes".to_string(), g.node_count().to_string()),
        ("edges".to_string(), g.edge_count().to_string()),
    ]
    .into();
    write_pairs(&meta, &out_path(cfg, SAMPLE_META)).map_err(io_failed("sample"))?;
    rec.set("sample_length", trace.len());
    info!("sampled {} nodes by {}", trace.len(), cfg.method.as_str());
    Ok(trace)
}

/// Reads a trace and the node count recorded next to it, if any.
pub fn load_trace(path: &Path) -> Result<(SampleTrace, Option<usize>), CliError> {
    let path = locate(path, TRACE);
    let trace = SampleTrace::read_file(&path).map_err(invalid)?;
    let meta = sibling(&path, SAMPLE_META);
    let nodes = if meta.exists() {
        let pairs = read_pairs(&meta).map_err(invalid)?;
        match pairs.get("nodes") {
            Some(v) => Some(v.parse().map_err(|_| invalid(format!("{}: bad node count {v:?}", meta.display())))?),
            None => None,
        }
    } else {
        None
    };
    Ok((trace, nodes))
}

pub fn estimate_stage(
    cfg: &PipelineConfig,
    trace: &SampleTrace,
    known_nodes: Option<usize>,
    rec: &mut Record,
) -> Result<EstimateBundle, CliError> {
    let est_cfg = cfg.estimator(known_nodes);
    if est_cfg.known_nodes.is_none() {
        return Err(invalid(
            "estimation needs the node count: pass --known-nodes or keep sample_meta.txt next to the trace",
        ));
    }
    let bundle = rec
        .timed("estimate", || estimate(trace, &est_cfg))
        .map_err(failed("estimate"))?;
    bundle.write_dir(&out_path(cfg, ESTIMATE)).map_err(failed("estimate"))?;
    info!(
        "estimated {} JDD entries and {} clustering values",
        bundle.jdd.len(),
        bundle.ck.len()
    );
    Ok(bundle)
}

/// An estimate directory, or a run directory containing one.
pub fn load_estimate(path: &Path) -> Result<EstimateBundle, CliError> {
    let nested = path.join(ESTIMATE);
    let dir = if nested.is_dir() { nested } else { path.to_path_buf() };
    must_exist(&dir.join("jdd.txt"))?;
    EstimateBundle::read_dir(&dir).map_err(invalid)
}

pub fn postprocess_stage(cfg: &PipelineConfig, bundle: &EstimateBundle, rec: &mut Record) -> Result<TargetSpec, CliError> {
    let (spec, report) = rec
        .timed("postprocess", || postprocess(bundle, cfg.postprocess()))
        .map_err(failed("postprocess"))?;
    spec.write_file(&out_path(cfg, SPEC)).map_err(failed("postprocess"))?;
    let perturbation = report.edges_changed as f64 / report.rounded_mass.max(1) as f64;
    let summary: Pairs = [
        ("smoothed", report.smoothed.to_string()),
        ("rounded_mass", report.rounded_mass.to_string()),
        ("edges_changed", report.edges_changed.to_string()),
        ("perturbation", perturbation.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    write_pairs(&summary, &out_path(cfg, POSTPROCESS)).map_err(io_failed("postprocess"))?;
    rec.set("edges_changed", report.edges_changed);
    rec.set("perturbation", perturbation);
    info!(
        "target: {} nodes, {} edges; repair changed {} edges ({:.1}%)",
        spec.n_nodes,
        spec.edge_count(),
        report.edges_changed,
        100.0 * perturbation
    );
    Ok(spec)
}

pub fn load_spec(path: &Path) -> Result<TargetSpec, CliError> {
    let path = locate(path, SPEC);
    must_exist(&path)?;
    TargetSpec::read_file(&path).map_err(invalid)
}

/// `2kt+improved`-style name of a pairing.
pub fn pairing_label(start: Start, variant: Variant) -> String {
    let v = match variant {
        Variant::Plain => "plain",
        Variant::Improved => "improved",
    };
    format!("{}+{v}", start.as_str())
}

/// File-name suffix: empty when only one pairing runs.
fn suffix(label: &str, many: bool) -> String {
    if many {
        format!("_{}", label.replace('+', "_"))
    } else {
        String::new()
    }
}

pub fn generate_stage(
    cfg: &PipelineConfig,
    spec: &TargetSpec,
    rec: &mut Record,
) -> Result<Vec<(String, Generated)>, CliError> {
    let pairings = cfg.pairings();
    let many = pairings.len() > 1;
    let mut out = Vec::new();
    let mut timing = String::from("pairing,construction_s,mcmc_s,total_s,proposals,accepted,converged,nmae_ck\n");
    for (start, variant) in pairings {
        let label = pairing_label(start, variant);
        let g = rec
            .timed(&format!("generate.{label}"), || generate(spec, start, &cfg.mcmc(variant)))
            .map_err(failed("generate"))?;
        let sfx = suffix(&label, many);
        write_edge_list_file(g.graph(), &out_path(cfg, &format!("generated{sfx}.edges"))).map_err(failed("generate"))?;
        let trace = fs::File::create(out_path(cfg, &format!("mcmc{sfx}.csv"))).map_err(io_failed("generate"))?;
        write_trace_csv(&g.outcome.trace, std::io::BufWriter::new(trace)).map_err(failed("generate"))?;
        let o = &g.outcome;
        timing.push_str(&format!(
            "{label},{},{},{},{},{},{},{}\n",
            g.construction_time.as_secs_f64(),
            g.mcmc_time.as_secs_f64(),
            g.total_time().as_secs_f64(),
            o.proposals,
            o.accepted,
            o.converged,
            o.nmae
        ));
        rec.set(format!("{label}.converged"), o.converged);
        rec.set(format!("{label}.nmae_ck"), o.nmae);
        rec.set(format!("{label}.proposals"), o.proposals);
        info!(
            "{label}: {:.2}s construction, {:.2}s swaps, NMAE(c̄(k)) {:.4}{}",
            g.construction_time.as_secs_f64(),
            g.mcmc_time.as_secs_f64(),
            o.nmae,
            if o.converged { "" } else { " (budget exhausted)" }
        );
        if !o.converged {
            rec.unconverged.push(label.clone());
        }
        out.push((label, g));
    }
    fs::write(out_path(cfg, TIMING), timing).map_err(io_failed("generate"))?;
    Ok(out)
}

pub fn compare_stage(
    cfg: &PipelineConfig,
    reference: &Graph,
    generated: &Graph,
    label: Option<&str>,
    rec: &mut Record,
) -> Result<ComparisonReport, CliError> {
    let report = rec
        .timed(&format!("compare{}", label.map_or(String::new(), |l| format!(".{l}"))), || {
            compare(reference, generated, &cfg.compare())
        })
        .map_err(failed("compare"))?;
    let sfx = label.map_or(String::new(), |l| suffix(l, true));
    let write = |name: String, f: &dyn Fn(fs::File) -> dk25::Result<()>| -> Result<(), CliError> {
        let file = fs::File::create(out_path(cfg, &name)).map_err(io_failed("compare"))?;
        f(file).map_err(failed("compare"))
    };
    write(format!("report{sfx}.txt"), &|f| report.write_table(f))?;
    write(format!("report{sfx}.csv"), &|f| report.write_csv(f))?;
    report
        .write_bins(&out_path(cfg, &format!("bins{sfx}")))
        .map_err(failed("compare"))?;
    for r in &report.results {
        if let Some(v) = r.nmae {
            rec.set(format!("{}nmae.{}", label.map_or(String::new(), |l| format!("{l}.")), r.metric.slug()), v);
        }
    }
    Ok(report)
}

/// Mean and sample standard deviation of per-run NMAEs, one row per
/// pairing and metric.
pub fn write_aggregate(path: &Path, runs: &[Vec<(String, ComparisonReport)>]) -> std::io::Result<()> {
    let mut text = String::from("pairing,metric,mean,stddev,runs\n");
    let labels: Vec<&String> = runs.first().map(|r| r.iter().map(|(l, _)| l).collect()).unwrap_or_default();
    for label in labels {
        for m in Metric::ALL {
            let vals: Vec<f64> = runs
                .iter()
                .flat_map(|r| r.iter().filter(|(l, _)| l == label).filter_map(|(_, rep)| rep.nmae(m)))
                .collect();
            if vals.is_empty() {
                text.push_str(&format!("{label},{},,,0\n", m.slug()));
                continue;
            }
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let sd = if vals.len() > 1 {
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            text.push_str(&format!("{label},{},{mean},{sd},{}\n", m.slug(), vals.len()));
        }
    }
    fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locate_and_sibling() {
        let dir = std::env::temp_dir();
        assert_eq!(locate(&dir, "x"), dir.join("x"));
        assert_eq!(locate(Path::new("a/b.txt"), "x"), PathBuf::from("a/b.txt"));
        assert_eq!(sibling(Path::new("a/b.txt"), "m"), PathBuf::from("a/m"));
        assert_eq!(sibling(Path::new("b.txt"), "m"), PathBuf::from("m"));
    }

    #[test]
    fn pairing_names() {
        assert_eq!(pairing_label(Start::TwoKT, Variant::Improved), "2kt+improved");
        assert_eq!(suffix("2k+plain", true), "_2k_plain");
        assert_eq!(suffix("2k+plain", false), "");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(invalid("x").exit_code(), 2);
        assert_eq!(failed("generate")(dk25::Error::Input("y".into())).exit_code(), 3);
        assert_eq!(CliError::NotConverged(vec![]).exit_code(), 4);
    }
}
