//! Flat `key = value` configuration shared by every subcommand.
//!
//! Values are layered: built-in defaults, then a config file, then flags.
//! A run manifest is a config file plus `command`, `version`, `timing.*`
//! and `result.*` lines, so it can be fed back in for replay.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use dk25::generation::{McmcConfig, Start, Variant};
use dk25::metrics::{CompareOptions, CycleBasisOptions};
use dk25::sampling::Method;

pub type Pairs = BTreeMap<String, String>;

/// Which generator pairings to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorChoice {
    One(Start),
    /// All four start/chain pairings.
    All,
}

impl GeneratorChoice {
    fn as_str(self) -> &'static str {
        match self {
            GeneratorChoice::One(s) => s.as_str(),
            GeneratorChoice::All => "all",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    /// Second graph for `compare`.
    pub against: Option<PathBuf>,
    pub out: PathBuf,
    pub method: Method,
    pub pct: f64,
    pub seed: u64,
    pub margin: usize,
    pub hybrid_threshold: Option<f64>,
    pub known_nodes: Option<usize>,
    pub known_edges: Option<usize>,
    pub smooth: bool,
    pub generator: GeneratorChoice,
    pub mcmc: Variant,
    pub nmae_stop: f64,
    pub max_swaps: Option<u64>,
    pub runs: usize,
    pub path_sources: Option<usize>,
    pub clique_timeout_s: Option<f64>,
    pub cycle_timeout_s: Option<f64>,
    pub bins: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: None,
            against: None,
            out: PathBuf::from("dk25-out"),
            method: Method::Rw,
            pct: 20.0,
            seed: 0,
            margin: dk25::estimation::EstimatorConfig::default().margin,
            hybrid_threshold: None,
            known_nodes: None,
            known_edges: None,
            smooth: true,
            generator: GeneratorChoice::One(Start::TwoKT),
            mcmc: Variant::Improved,
            nmae_stop: McmcConfig::default().nmae_stop,
            max_swaps: None,
            runs: 1,
            path_sources: None,
            clique_timeout_s: Some(120.0),
            cycle_timeout_s: Some(120.0),
            bins: 30,
        }
    }
}

/// Keys a manifest carries that are not configuration.
fn is_record_key(key: &str) -> bool {
    key == "command" || key == "version" || key.starts_with("timing.") || key.starts_with("result.")
}

/// Parses `key = value` lines; `#` starts a comment line.
pub fn parse_pairs(text: &str, label: &str) -> Result<Pairs, String> {
    let mut out = Pairs::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("{label}:{}: expected key = value", i + 1))?;
        out.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(out)
}

pub fn read_pairs(path: &Path) -> Result<Pairs, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_pairs(&text, &path.display().to_string())
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T, String>
where
    T::Err: Display,
{
    v.parse().map_err(|e| format!("{key}: invalid value {v:?}: {e}"))
}

/// `none` / empty clears an optional setting.
fn optional<T: FromStr>(key: &str, v: &str) -> Result<Option<T>, String>
where
    T::Err: Display,
{
    if v.is_empty() || v.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        parse(key, v).map(Some)
    }
}

impl PipelineConfig {
    /// Defaults overridden by `file`, then by `flags`.
    pub fn resolve(file: &Pairs, flags: &Pairs) -> Result<Self, String> {
        let mut merged = file.clone();
        merged.extend(flags.iter().map(|(k, v)| (k.clone(), v.clone())));
        let mut c = PipelineConfig::default();
        for (key, v) in &merged {
            let key = key.as_str();
            match key {
                "input" => c.input = optional(key, v)?,
                "against" => c.against = optional(key, v)?,
                "out" => c.out = parse(key, v)?,
                "method" => c.method = v.parse().map_err(|e| format!("{e}"))?,
                "pct" => c.pct = parse(key, v)?,
                "seed" => c.seed = parse(key, v)?,
                "margin" => c.margin = parse(key, v)?,
                "hybrid_threshold" => c.hybrid_threshold = optional(key, v)?,
                "known_nodes" => c.known_nodes = optional(key, v)?,
                "known_edges" => c.known_edges = optional(key, v)?,
                "smooth" => c.smooth = parse(key, v)?,
                "generator" => {
                    c.generator = match v.to_ascii_lowercase().as_str() {
                        "2k" => GeneratorChoice::One(Start::TwoK),
                        "2kt" => GeneratorChoice::One(Start::TwoKT),
                        "all" => GeneratorChoice::All,
                        _ => return Err(format!("generator: expected 2k, 2kt or all, got {v:?}")),
                    }
                }
                "mcmc" => c.mcmc = v.parse().map_err(|e| format!("{e}"))?,
                "nmae_stop" => c.nmae_stop = parse(key, v)?,
                "max_swaps" => c.max_swaps = optional(key, v)?,
                "runs" => c.runs = parse(key, v)?,
                "path_sources" => c.path_sources = optional(key, v)?,
                "clique_timeout_s" => c.clique_timeout_s = optional(key, v)?,
                "cycle_timeout_s" => c.cycle_timeout_s = optional(key, v)?,
                "bins" => c.bins = parse(key, v)?,
                k if is_record_key(k) => {}
                _ => return Err(format!("unknown configuration key {key:?}")),
            }
        }
        c.check()?;
        Ok(c)
    }

    fn check(&self) -> Result<(), String> {
        if !(self.pct > 0.0 && self.pct <= 100.0) {
            return Err(format!("pct must be in (0, 100], got {}", self.pct));
        }
        if !(self.nmae_stop > 0.0) {
            return Err(format!("nmae_stop must be positive, got {}", self.nmae_stop));
        }
        if self.runs == 0 {
            return Err("runs must be at least 1".into());
        }
        if self.bins == 0 {
            return Err("bins must be at least 1".into());
        }
        for (key, t) in [("clique_timeout_s", self.clique_timeout_s), ("cycle_timeout_s", self.cycle_timeout_s)] {
            if t.is_some_and(|t| !(t > 0.0)) {
                return Err(format!("{key} must be positive"));
            }
        }
        Ok(())
    }

    /// The configuration as `key = value` pairs; `resolve` of the result
    /// gives back `self`.
    pub fn to_pairs(&self) -> Pairs {
        fn opt<T: Display>(v: &Option<T>) -> String {
            v.as_ref().map_or("none".into(), |v| v.to_string())
        }
        let path = |p: &Option<PathBuf>| p.as_ref().map_or("none".into(), |p| p.display().to_string());
        [
            ("input", path(&self.input)),
            ("against", path(&self.against)),
            ("out", self.out.display().to_string()),
            ("method", self.method.as_str().into()),
            ("pct", self.pct.to_string()),
            ("seed", self.seed.to_string()),
            ("margin", self.margin.to_string()),
            ("hybrid_threshold", opt(&self.hybrid_threshold)),
            ("known_nodes", opt(&self.known_nodes)),
            ("known_edges", opt(&self.known_edges)),
            ("smooth", self.smooth.to_string()),
            ("generator", self.generator.as_str().into()),
            (
                "mcmc",
                match self.mcmc {
                    Variant::Plain => "plain".into(),
                    Variant::Improved => "improved".into(),
                },
            ),
            ("nmae_stop", self.nmae_stop.to_string()),
            ("max_swaps", opt(&self.max_swaps)),
            ("runs", self.runs.to_string()),
            ("path_sources", opt(&self.path_sources)),
            ("clique_timeout_s", opt(&self.clique_timeout_s)),
            ("cycle_timeout_s", opt(&self.cycle_timeout_s)),
            ("bins", self.bins.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    pub fn estimator(&self, known_nodes: Option<usize>) -> dk25::estimation::EstimatorConfig {
        dk25::estimation::EstimatorConfig {
            margin: self.margin,
            hybrid_threshold: self.hybrid_threshold,
            known_nodes: self.known_nodes.or(known_nodes),
            known_edges: self.known_edges,
        }
    }

    pub fn postprocess(&self) -> dk25::postprocess::PostprocessOptions {
        dk25::postprocess::PostprocessOptions {
            smooth: self.smooth,
            seed: self.seed,
            ..Default::default()
        }
    }

    pub fn mcmc(&self, variant: Variant) -> McmcConfig {
        McmcConfig {
            variant,
            nmae_stop: self.nmae_stop,
            max_swaps: self.max_swaps,
            seed: self.seed,
            ..McmcConfig::default()
        }
    }

    /// Start/chain pairings selected by `generator` and `mcmc`.
    pub fn pairings(&self) -> Vec<(Start, Variant)> {
        match self.generator {
            GeneratorChoice::One(s) => vec![(s, self.mcmc)],
            GeneratorChoice::All => vec![
                (Start::TwoKT, Variant::Improved),
                (Start::TwoKT, Variant::Plain),
                (Start::TwoK, Variant::Improved),
                (Start::TwoK, Variant::Plain),
            ],
        }
    }

    pub fn compare(&self) -> CompareOptions {
        let secs = |t: Option<f64>| t.map(Duration::from_secs_f64);
        CompareOptions {
            path_sources: self.path_sources,
            clique_timeout: secs(self.clique_timeout_s),
            cycles: CycleBasisOptions {
                timeout: secs(self.cycle_timeout_s),
                ..CycleBasisOptions::default()
            },
            bins: self.bins,
            seed: self.seed,
            ..CompareOptions::default()
        }
    }
}

pub fn write_pairs(pairs: &Pairs, path: &Path) -> std::io::Result<()> {
    let mut text = String::new();
    for (k, v) in pairs {
        text.push_str(&format!("{k} = {v}\n"));
    }
    std::fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(s: &str) -> Pairs {
        parse_pairs(s, "test").unwrap()
    }

    #[test]
    fn precedence_is_flags_then_file_then_defaults() {
        let file = pairs("# comment\npct = 10\nseed = 4\nnmae-stop = 0.05\n");
        let flags = pairs("seed = 9");
        let c = PipelineConfig::resolve(&file, &flags).unwrap();
        assert_eq!((c.pct, c.seed, c.nmae_stop), (10.0, 9, 0.05));
        assert_eq!(c.method, Method::Rw);
    }

    #[test]
    fn round_trip_through_pairs() {
        let file = pairs("generator = all\nmax_swaps = 1000\nknown_nodes = 12\nclique_timeout_s = none\nmethod = wis");
        let c = PipelineConfig::resolve(&file, &Pairs::new()).unwrap();
        assert_eq!(c.pairings().len(), 4);
        let mut manifest = c.to_pairs();
        manifest.insert("command".into(), "pipeline".into());
        manifest.insert("timing.sample_ms".into(), "3".into());
        assert_eq!(PipelineConfig::resolve(&manifest, &Pairs::new()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_values() {
        for bad in ["pct = 0", "pct = 101", "nmae_stop = 0", "runs = 0", "generator = 3k", "colour = red", "method = bfs", "seed = -1"] {
            assert!(PipelineConfig::resolve(&pairs(bad), &Pairs::new()).is_err(), "{bad}");
        }
        assert!(parse_pairs("novalue", "x").is_err());
    }
}
