//! `dk25`: sample → estimate → post-process → generate → compare.

mod config;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info, warn};

use config::{read_pairs, Pairs, PipelineConfig};
use stages::*;

#[derive(Parser)]
#[command(name = "dk25", version, about = "Sample a graph, estimate its 2.5K statistics and generate look-alike graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample nodes of an edge-list graph (writes trace.txt).
    Sample(Flags),
    /// Estimate JDD and c̄(k) from a trace (writes estimate/).
    Estimate(Flags),
    /// Smooth, round and repair an estimate into a target (writes spec.txt).
    Postprocess(Flags),
    /// Generate graphs from a target (writes generated*.edges, timing.csv).
    Generate(Flags),
    /// Compare two graphs on the metric suite (writes report.txt, report.csv, bins/).
    Compare(Flags),
    /// Run every stage on an edge-list graph.
    Pipeline(Flags),
    /// Re-run the invocation recorded in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory; defaults to the recorded one.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Flags override the `--config` file, which overrides the defaults.
#[derive(Args, Debug, Default)]
struct Flags {
    /// key = value file with any of the settings below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Stage input: edge list, trace, or a directory holding the previous stage's files.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Second graph for `compare`.
    #[arg(long)]
    against: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["uis", "wis", "rw"])]
    method: Option<String>,
    /// Sample length as a percentage of the nodes.
    #[arg(long)]
    pct: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Minimum index gap between walk samples forming an induced pair.
    #[arg(long)]
    margin: Option<usize>,
    #[arg(long)]
    known_nodes: Option<usize>,
    #[arg(long)]
    known_edges: Option<usize>,
    #[arg(long)]
    hybrid_threshold: Option<f64>,
    /// Skip JDD smoothing.
    #[arg(long)]
    no_smooth: bool,
    #[arg(long, value_parser = ["2k", "2kt", "all"])]
    generator: Option<String>,
    #[arg(long, value_parser = ["plain", "improved"])]
    mcmc: Option<String>,
    /// Stop the swap chain once NMAE(c̄(k)) falls below this.
    #[arg(long)]
    nmae_stop: Option<f64>,
    #[arg(long)]
    max_swaps: Option<u64>,
    /// Seeded repetitions of `pipeline`, run concurrently.
    #[arg(long)]
    runs: Option<usize>,
    /// Any other setting, e.g. `--set clique_timeout_s=30`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Flags {
    fn pairs(&self) -> Result<Pairs, CliError> {
        let mut p = Pairs::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                p.insert(k.to_string(), v);
            }
        };
        let path = |v: &Option<PathBuf>| v.as_ref().map(|p| p.display().to_string());
        put("input", path(&self.input));
        put("against", path(&self.against));
        put("out", path(&self.out));
        put("method", self.method.clone());
        put("pct", self.pct.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("margin", self.margin.map(|v| v.to_string()));
        put("known_nodes", self.known_nodes.map(|v| v.to_string()));
        put("known_edges", self.known_edges.map(|v| v.to_string()));
        put("hybrid_threshold", self.hybrid_threshold.map(|v| v.to_string()));
        put("smooth", self.no_smooth.then(|| "false".to_string()));
        put("generator", self.generator.clone());
        put("mcmc", self.mcmc.clone());
        put("nmae_stop", self.nmae_stop.map(|v| v.to_string()));
        put("max_swaps", self.max_swaps.map(|v| v.to_string()));
        put("runs", self.runs.map(|v| v.to_string()));
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| invalid(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            p.insert(k.trim().replace('-', "_"), v.trim().to_string());
        }
        Ok(p)
    }

    fn resolve(&self) -> Result<PipelineConfig, CliError> {
        let file = match &self.config {
            Some(path) => read_pairs(path).map_err(invalid)?,
            None => Pairs::new(),
        };
        PipelineConfig::resolve(&file, &self.pairs()?).map_err(invalid)
    }
}

/// Runs one pipeline and returns its comparison reports by pairing.
fn pipeline(cfg: &PipelineConfig, rec: &mut Record) -> Result<Vec<(String, dk25::metrics::ComparisonReport)>, CliError> {
    let g = load_graph(input(cfg)?, true)?;
    std::fs::create_dir_all(&cfg.out).map_err(invalid)?;
    let trace = sample_stage(cfg, &g, rec)?;
    let bundle = estimate_stage(cfg, &trace, Some(g.node_count()), rec)?;
    let spec = postprocess_stage(cfg, &bundle, rec)?;
    let generated = generate_stage(cfg, &spec, rec)?;
    let many = generated.len() > 1;
    generated
        .iter()
        .map(|(label, out)| {
            let report = compare_stage(cfg, &g, out.graph(), many.then_some(label.as_str()), rec)?;
            Ok((label.clone(), report))
        })
        .collect()
}

fn run(command: &str, cfg: &PipelineConfig) -> Result<(), CliError> {
    if cfg.runs > 1 && command != "pipeline" {
        return Err(invalid("--runs applies to the pipeline command only"));
    }
    let mut rec = Record::default();
    let result = run_stages(command, cfg, &mut rec);
    let status = match &result {
        Err(CliError::Validation(_)) => return result,
        Err(CliError::Stage { stage, .. }) => format!("failed:{stage}"),
        Ok(()) if !rec.unconverged.is_empty() => "not_converged".into(),
        Ok(()) => "ok".into(),
        Err(CliError::NotConverged(_)) => unreachable!("reported through the record"),
    };
    rec.set("status", status);
    rec.write_manifest(cfg, command).map_err(invalid)?;
    result?;
    if rec.unconverged.is_empty() {
        Ok(())
    } else {
        Err(CliError::NotConverged(rec.unconverged))
    }
}

fn run_stages(command: &str, cfg: &PipelineConfig, rec: &mut Record) -> Result<(), CliError> {
    match command {
        "sample" => {
            let g = load_graph(input(cfg)?, true)?;
            sample_stage(cfg, &g, rec)?;
        }
        "estimate" => {
            let (trace, nodes) = load_trace(input(cfg)?)?;
            estimate_stage(cfg, &trace, nodes, rec)?;
        }
        "postprocess" => {
            let bundle = load_estimate(input(cfg)?)?;
            postprocess_stage(cfg, &bundle, rec)?;
        }
        "generate" => {
            let spec = load_spec(input(cfg)?)?;
            generate_stage(cfg, &spec, rec)?;
        }
        "compare" => {
            let reference = load_graph(input(cfg)?, false)?;
            let against = cfg.against.as_deref().ok_or_else(|| invalid("--against is required"))?;
            let generated = load_graph(against, false)?;
            let report = compare_stage(cfg, &reference, &generated, None, rec)?;
            report.write_table(std::io::stdout()).map_err(invalid)?;
        }
        "pipeline" if cfg.runs > 1 => {
            input(cfg)?;
            let results: Vec<_> = std::thread::scope(|s| {
                let handles: Vec<_> = (0..cfg.runs)
                    .map(|i| {
                        let mut run_cfg = cfg.clone();
                        run_cfg.seed = cfg.seed.wrapping_add(i as u64);
                        run_cfg.runs = 1;
                        run_cfg.out = cfg.out.join(format!("run_{i}"));
                        s.spawn(move || {
                            let mut r = Record::default();
                            let reports = pipeline(&run_cfg, &mut r);
                            let status = match &reports {
                                Ok(_) if r.unconverged.is_empty() => "ok".to_string(),
                                Ok(_) => "not_converged".to_string(),
                                Err(e) => e.to_string(),
                            };
                            r.set("status", status);
                            if let Err(e) = r.write_manifest(&run_cfg, "pipeline") {
                                warn!("run {i}: cannot write manifest: {e}");
                            }
                            (reports, r)
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("pipeline run panicked")).collect()
            });
            let mut reports = Vec::new();
            for (i, (res, r)) in results.into_iter().enumerate() {
                reports.push(res?);
                rec.unconverged.extend(r.unconverged.into_iter().map(|l| format!("run_{i}/{l}")));
            }
            write_aggregate(&cfg.out.join(AGGREGATE), &reports).map_err(invalid)?;
            info!("aggregated {} runs into {}", cfg.runs, cfg.out.join(AGGREGATE).display());
        }
        "pipeline" => {
            for (label, report) in pipeline(cfg, rec)? {
                println!("{label}");
                report.write_table(std::io::stdout()).map_err(invalid)?;
            }
        }
        other => return Err(invalid(format!("unknown command {other:?}"))),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let (command, cfg) = match cli.command {
        Command::Sample(f) => ("sample", f.resolve()?),
        Command::Estimate(f) => ("estimate", f.resolve()?),
        Command::Postprocess(f) => ("postprocess", f.resolve()?),
        Command::Generate(f) => ("generate", f.resolve()?),
        Command::Compare(f) => ("compare", f.resolve()?),
        Command::Pipeline(f) => ("pipeline", f.resolve()?),
        Command::Replay { manifest, out } => {
            let recorded = read_pairs(&manifest).map_err(invalid)?;
            let command = recorded
                .get("command")
                .cloned()
                .ok_or_else(|| invalid(format!("{} records no command", manifest.display())))?;
            let mut flags = Pairs::new();
            if let Some(out) = out {
                flags.insert("out".into(), out.display().to_string());
            }
            let cfg = PipelineConfig::resolve(&recorded, &flags).map_err(invalid)?;
            return run(&command, &cfg);
        }
    };
    run(command, &cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
