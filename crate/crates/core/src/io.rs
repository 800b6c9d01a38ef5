//! Plain-text formats: edge lists, JDD triples and `c̄(k)` pairs.
//!
//! All formats are line based; blank lines and lines starting with `#` are
//! ignored on input. Real values are written with Rust's shortest round-trip
//! representation, so write → read → write is byte-identical.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{BuildReport, Graph};
use crate::jdd::{DegreeClustering, JddMatrix, JddValue};

pub(crate) fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        msg: msg.into(),
    }
}

pub(crate) fn parse_field<T: FromStr>(tok: Option<&str>, path: &str, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(path, line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(path, line, format!("bad {what} {tok:?}")))
}

/// Content lines with their 1-based line numbers.
pub(crate) fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(l) => {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                None
            } else {
                Some(Ok((i + 1, t.to_string())))
            }
        }
        Err(e) => Some(Err(e.into())),
    })
}

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Input(format!("cannot open {}: {e}", path.display())))
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// A graph read from an edge list, with the original ids of its nodes.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// `original_ids[v]` is the id node `v` had in the file.
    pub original_ids: Vec<u64>,
    pub report: BuildReport,
}

/// Reads an edge list. Ids need not be contiguous; they are relabelled
/// `0..N` in ascending order of the original id.
pub fn read_edge_list<R: BufRead>(reader: R, label: &str) -> Result<LoadedGraph> {
    let mut raw = Vec::new();
    for item in content_lines(reader) {
        let (no, line) = item?;
        let mut it = line.split_whitespace();
        let a: u64 = parse_field(it.next(), label, no, "source id")?;
        let b: u64 = parse_field(it.next(), label, no, "target id")?;
        raw.push((a, b));
    }
    let mut ids: Vec<u64> = raw.iter().flat_map(|&(a, b)| [a, b]).collect();
    ids.sort_unstable();
    ids.dedup();
    let index: BTreeMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let (graph, report) =
        Graph::from_edges_with_report(ids.len(), raw.iter().map(|(a, b)| (index[a], index[b])));
    Ok(LoadedGraph {
        graph,
        original_ids: ids,
        report,
    })
}

pub fn read_edge_list_file(path: &Path) -> Result<LoadedGraph> {
    read_edge_list(open(path)?, &path.display().to_string())
}

/// Writes `u v` per edge, `u < v`, ascending.
pub fn write_edge_list<W: Write>(g: &Graph, mut w: W) -> Result<()> {
    writeln!(w, "# nodes {} edges {}", g.node_count(), g.edge_count())?;
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_edge_list_file(g: &Graph, path: &Path) -> Result<()> {
    write_edge_list(g, create(path)?)
}

pub(crate) fn write_jdd_lines<V: JddValue, W: Write>(jdd: &JddMatrix<V>, w: &mut W) -> Result<()> {
    for ((k, l), v) in jdd.iter() {
        writeln!(w, "{k} {l} {v}")?;
    }
    Ok(())
}

pub(crate) fn parse_jdd_line<V: JddValue>(line: &str, label: &str, no: usize) -> Result<((usize, usize), V)> {
    let mut it = line.split_whitespace();
    let k: usize = parse_field(it.next(), label, no, "degree k")?;
    let l: usize = parse_field(it.next(), label, no, "degree l")?;
    let v: V = parse_field(it.next(), label, no, "count")?;
    if v < V::default() {
        return Err(parse_err(label, no, "negative count"));
    }
    Ok(((k, l), v))
}

/// One `k l count` triple per line.
pub fn write_jdd<V: JddValue, W: Write>(jdd: &JddMatrix<V>, mut w: W) -> Result<()> {
    write_jdd_lines(jdd, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_jdd<V: JddValue, R: BufRead>(reader: R, label: &str) -> Result<JddMatrix<V>> {
    let mut m = JddMatrix::new();
    for item in content_lines(reader) {
        let (no, line) = item?;
        let ((k, l), v) = parse_jdd_line::<V>(&line, label, no)?;
        m.add(k, l, v);
    }
    Ok(m)
}

pub fn write_jdd_file<V: JddValue>(jdd: &JddMatrix<V>, path: &Path) -> Result<()> {
    write_jdd(jdd, create(path)?)
}

pub fn read_jdd_file<V: JddValue>(path: &Path) -> Result<JddMatrix<V>> {
    read_jdd(open(path)?, &path.display().to_string())
}

pub(crate) fn write_ck_lines<W: Write>(ck: &DegreeClustering, w: &mut W) -> Result<()> {
    for (k, c) in ck.iter() {
        writeln!(w, "{k} {c}")?;
    }
    Ok(())
}

pub(crate) fn parse_ck_line(line: &str, label: &str, no: usize) -> Result<(usize, f64)> {
    let mut it = line.split_whitespace();
    let k: usize = parse_field(it.next(), label, no, "degree")?;
    let c: f64 = parse_field(it.next(), label, no, "clustering value")?;
    if !(0.0..=1.0).contains(&c) || k < 2 {
        return Err(parse_err(label, no, format!("invalid c(k) entry {k} {c}")));
    }
    Ok((k, c))
}

/// One `k value` pair per line.
pub fn write_ck<W: Write>(ck: &DegreeClustering, mut w: W) -> Result<()> {
    write_ck_lines(ck, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_ck<R: BufRead>(reader: R, label: &str) -> Result<DegreeClustering> {
    let mut ck = DegreeClustering::new();
    for item in content_lines(reader) {
        let (no, line) = item?;
        let (k, c) = parse_ck_line(&line, label, no)?;
        ck.insert(k, c);
    }
    Ok(ck)
}

pub fn write_ck_file(ck: &DegreeClustering, path: &Path) -> Result<()> {
    write_ck(ck, create(path)?)
}

pub fn read_ck_file(path: &Path) -> Result<DegreeClustering> {
    read_ck(open(path)?, &path.display().to_string())
}
