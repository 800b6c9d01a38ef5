//! Turning raw estimates into a realizable generator target: kernel
//! smoothing, stochastic rounding and a greedy realizability repair.
//!
//! A JDD is realizable iff (i) entries are integers, (ii) every implied
//! node count `D(k)` is an integer, (iii) `JDD(k,l) <= D(k) D(l)` for
//! `k != l`, (iv) `JDD(k,k) <= C(D(k), 2)`, and (v) same-degree edges
//! account for an even number of stubs. With single-count storage (v)
//! reduces to `k D(k) - Σ_{l≠k} JDD(k,l)` being even, which (ii) implies;
//! it is still checked independently.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use log::{debug, warn};
use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::estimation::EstimateBundle;
use crate::io::{content_lines, create, open, parse_ck_line, parse_err, parse_field, parse_jdd_line};
use crate::jdd::{DegreeClustering, IntJdd, RealJdd};
use crate::sampling::rng_from_seed;

/// Kernel support in bandwidths.
const KERNEL_CUTOFF: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingOptions {
    /// Grids with at most this many distinct degrees are left unsmoothed.
    pub min_distinct_degrees: usize,
}

impl Default for SmoothingOptions {
    fn default() -> Self {
        SmoothingOptions {
            min_distinct_degrees: 10,
        }
    }
}

fn gaussian(x: f64) -> f64 {
    (-0.5 * x * x).exp()
}

/// Gaussian kernel smoothing over the grid of observed degrees.
///
/// Works on the symmetric matrix `F` with `F(k,k) = 2 JDD(k,k)`, so that row
/// sums are stub counts. The bandwidth follows Scott's rule for two
/// dimensions, `h = σ m^(-1/6)`, with `σ` the stub-weighted standard
/// deviation of the degree and `m` the number of edges. Each source column
/// of the kernel is truncated at three bandwidths, reflected at degree 1/2
/// and normalized, so total mass and symmetry are preserved.
pub fn smooth_jdd(jdd: &RealJdd) -> Result<RealJdd> {
    if jdd.is_empty() {
        return Err(Error::Input("cannot smooth an empty JDD".into()));
    }
    if jdd.len() == 1 {
        return Ok(jdd.clone());
    }
    let grid = jdd.degrees();
    let pos: BTreeMap<usize, usize> = grid.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let n = grid.len();

    let mut f = DMatrix::<f64>::zeros(n, n);
    for ((k, l), v) in jdd.iter() {
        let (i, j) = (pos[&k], pos[&l]);
        if i == j {
            f[(i, i)] = 2.0 * v;
        } else {
            f[(i, j)] = v;
            f[(j, i)] = v;
        }
    }

    let mass = jdd.total_mass();
    let stubs: Vec<f64> = (0..n).map(|i| f.row(i).sum()).collect();
    let total: f64 = stubs.iter().sum();
    let mean = grid.iter().zip(&stubs).map(|(&k, s)| k as f64 * s).sum::<f64>() / total;
    let var = grid
        .iter()
        .zip(&stubs)
        .map(|(&k, s)| (k as f64 - mean).powi(2) * s)
        .sum::<f64>()
        / total;
    let h = var.sqrt() * mass.powf(-1.0 / 6.0);
    if !(h > 0.0) || !h.is_finite() {
        return Ok(jdd.clone());
    }

    // kernel[(a, i)]: share of source degree i moved to target degree a.
    let mut kernel = DMatrix::<f64>::zeros(n, n);
    for (i, &src) in grid.iter().enumerate() {
        let src = src as f64;
        let mut col = 0.0;
        for (a, &dst) in grid.iter().enumerate() {
            let dst = dst as f64;
            if (dst - src).abs() > KERNEL_CUTOFF * h {
                continue;
            }
            let w = gaussian((dst - src) / h) + gaussian((dst + src - 1.0) / h);
            kernel[(a, i)] = w;
            col += w;
        }
        for a in 0..n {
            kernel[(a, i)] /= col;
        }
    }

    let g = &kernel * f * kernel.transpose();
    let mut out = RealJdd::new();
    for a in 0..n {
        for b in a..n {
            let v = if a == b { g[(a, a)] / 2.0 } else { 0.5 * (g[(a, b)] + g[(b, a)]) };
            if v > 0.0 {
                out.set(grid[a], grid[b], v);
            }
        }
    }
    debug!("smoothed {} entries over {} degrees, h = {h:.3}", jdd.len(), n);
    Ok(out)
}

/// [`smooth_jdd`], skipped for small degree grids.
pub fn smooth_if_large(jdd: &RealJdd, opts: SmoothingOptions) -> Result<RealJdd> {
    if jdd.degrees().len() <= opts.min_distinct_degrees {
        debug!("skipping smoothing: only {} distinct degrees", jdd.degrees().len());
        return Ok(jdd.clone());
    }
    smooth_jdd(jdd)
}

/// Rounds each entry to `floor(x)` or `floor(x) + 1`, the latter with
/// probability `x - floor(x)`.
pub fn stochastic_round(jdd: &RealJdd, seed: u64) -> IntJdd {
    let mut rng = rng_from_seed(seed);
    let mut out = IntJdd::new();
    for ((k, l), v) in jdd.iter() {
        let fl = v.floor();
        let frac = v - fl;
        let up = frac > 0.0 && rng.random::<f64>() < frac;
        out.set(k, l, fl as u64 + up as u64);
    }
    out
}

/// A failed realizability condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A key with degree 0, which cannot carry an edge.
    ZeroDegree { k: usize, l: usize },
    /// (ii): the stub count of degree `k` is not a multiple of `k`.
    FractionalNodes { k: usize, stubs: u64 },
    /// (iii)
    OffDiagonalCap { k: usize, l: usize, value: u64, cap: u64 },
    /// (iv)
    DiagonalCap { k: usize, value: u64, cap: u64 },
    /// (v)
    OddDiagonalStubs { k: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroDegree { k, l } => write!(f, "entry ({k},{l}) has a degree-0 endpoint"),
            Violation::FractionalNodes { k, stubs } => {
                write!(f, "(ii) degree {k}: {stubs} stubs is not a multiple of {k}")
            }
            Violation::OffDiagonalCap { k, l, value, cap } => {
                write!(f, "(iii) JDD({k},{l}) = {value} exceeds D({k})D({l}) = {cap}")
            }
            Violation::DiagonalCap { k, value, cap } => {
                write!(f, "(iv) JDD({k},{k}) = {value} exceeds C(D({k}),2) = {cap}")
            }
            Violation::OddDiagonalStubs { k } => write!(f, "(v) degree {k}: odd same-degree stub count"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Realizability {
    pub violations: Vec<Violation>,
}

impl Realizability {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn diagonal_cap(d: u64) -> u64 {
    d * d.saturating_sub(1) / 2
}

/// Checks all realizability conditions.
pub fn verify_realizability(jdd: &IntJdd) -> Realizability {
    let mut violations = Vec::new();
    let counts = jdd.integer_degree_counts();
    let mut off_row: BTreeMap<usize, u64> = BTreeMap::new();
    for ((k, l), v) in jdd.iter() {
        if k == 0 {
            violations.push(Violation::ZeroDegree { k, l });
        }
        if k != l {
            *off_row.entry(k).or_insert(0) += v;
            *off_row.entry(l).or_insert(0) += v;
        }
    }
    for (&k, d) in &counts {
        if k == 0 {
            continue;
        }
        match d {
            None => {
                let stubs = 2 * jdd.get(k, k) + off_row.get(&k).copied().unwrap_or(0);
                violations.push(Violation::FractionalNodes { k, stubs });
            }
            Some(d) => {
                let own = (k as u64 * d).checked_sub(off_row.get(&k).copied().unwrap_or(0));
                if own.is_none_or(|s| s % 2 != 0) {
                    violations.push(Violation::OddDiagonalStubs { k });
                }
            }
        }
    }
    for ((k, l), v) in jdd.iter() {
        let (Some(Some(dk)), Some(Some(dl))) = (counts.get(&k), counts.get(&l)) else {
            continue;
        };
        if k == l {
            let cap = diagonal_cap(*dk);
            if v > cap {
                violations.push(Violation::DiagonalCap { k, value: v, cap });
            }
        } else if v > dk * dl {
            violations.push(Violation::OffDiagonalCap { k, l, value: v, cap: dk * dl });
        }
    }
    Realizability { violations }
}

/// Output of [`repair_realizability`].
#[derive(Debug, Clone, PartialEq)]
pub struct Repair {
    pub jdd: IntJdd,
    pub degree_counts: BTreeMap<usize, u64>,
    /// L1 distance between input and output, in edges.
    pub edges_changed: u64,
}

/// Working state of the repair: the matrix, per-row partner sets, target
/// node counts and per-row stub deficit `δ(k) = k D(k) - stubs(k)`.
struct RepairState {
    j: BTreeMap<(usize, usize), u64>,
    partners: BTreeMap<usize, BTreeSet<usize>>,
    d: BTreeMap<usize, u64>,
    delta: BTreeMap<usize, i64>,
}

fn key(k: usize, l: usize) -> (usize, usize) {
    (k.min(l), k.max(l))
}

impl RepairState {
    fn get(&self, k: usize, l: usize) -> u64 {
        self.j.get(&key(k, l)).copied().unwrap_or(0)
    }

    fn cap(&self, k: usize, l: usize) -> u64 {
        let dk = self.d.get(&k).copied().unwrap_or(0);
        if k == l {
            diagonal_cap(dk)
        } else {
            dk * self.d.get(&l).copied().unwrap_or(0)
        }
    }

    fn slack(&self, k: usize, l: usize) -> u64 {
        self.cap(k, l).saturating_sub(self.get(k, l))
    }

    fn delta(&self, k: usize) -> i64 {
        self.delta[&k]
    }

    fn add(&mut self, k: usize, l: usize, amount: u64) {
        let v = self.get(k, l) + amount;
        self.j.insert(key(k, l), v);
        self.partners.entry(k).or_default().insert(l);
        self.partners.entry(l).or_default().insert(k);
        *self.delta.get_mut(&k).unwrap() -= amount as i64;
        *self.delta.get_mut(&l).unwrap() -= amount as i64;
    }

    fn remove(&mut self, k: usize, l: usize, amount: u64) {
        let v = self.get(k, l) - amount;
        if v == 0 {
            self.j.remove(&key(k, l));
            self.partners.get_mut(&k).unwrap().remove(&l);
            self.partners.get_mut(&l).unwrap().remove(&k);
        } else {
            self.j.insert(key(k, l), v);
        }
        *self.delta.get_mut(&k).unwrap() += amount as i64;
        *self.delta.get_mut(&l).unwrap() += amount as i64;
    }

    fn partners_of(&self, k: usize) -> Vec<usize> {
        self.partners.get(&k).map(|s| s.iter().copied().collect()).unwrap_or_default()
    }

    /// Lowers entries of row `k` that exceed their caps.
    fn enforce_caps(&mut self, k: usize) {
        for l in self.partners_of(k) {
            let (v, cap) = (self.get(k, l), self.cap(k, l));
            if v > cap {
                self.remove(k, l, v - cap);
            }
        }
    }

    fn set_count(&mut self, k: usize, d: u64) {
        let old = self.d[&k];
        self.d.insert(k, d);
        *self.delta.get_mut(&k).unwrap() += k as i64 * (d as i64 - old as i64);
        self.enforce_caps(k);
    }

    fn rows(&self, positive: bool) -> Vec<usize> {
        let mut r: Vec<usize> = self
            .delta
            .iter()
            .filter(|(_, &v)| if positive { v > 0 } else { v < 0 })
            .map(|(&k, _)| k)
            .collect();
        r.sort_by_key(|&k| std::cmp::Reverse(self.delta(k).abs()));
        r
    }

    /// One balancing move; false if none applies.
    fn step(&mut self) -> bool {
        let pos = self.rows(true);
        let neg = self.rows(false);

        // Rows whose imbalance is a whole, even number of nodes adjust D.
        for (&k, &dk) in &self.delta {
            if dk != 0 && dk % 2 == 0 && dk % k as i64 == 0 {
                let d = self.d[&k] as i64 - dk / k as i64;
                if d >= 0 {
                    self.set_count(k, d as u64);
                    return true;
                }
            }
        }
        // Two rows short of stubs share an edge.
        for &k in &pos {
            let dk = self.delta(k);
            if dk >= 2 && self.slack(k, k) > 0 {
                let a = (dk as u64 / 2).min(self.slack(k, k));
                self.add(k, k, a);
                return true;
            }
            for &l in &pos {
                if l != k && self.slack(k, l) > 0 {
                    let a = (dk as u64).min(self.delta(l) as u64).min(self.slack(k, l));
                    self.add(k, l, a);
                    return true;
                }
            }
        }
        // Two rows with surplus stubs drop a shared edge.
        for &k in &neg {
            let dk = -self.delta(k);
            if dk >= 2 && self.get(k, k) > 0 {
                let a = (dk as u64 / 2).min(self.get(k, k));
                self.remove(k, k, a);
                return true;
            }
            for l in self.partners_of(k) {
                if l != k && self.delta(l) < 0 {
                    let a = (dk as u64).min((-self.delta(l)) as u64).min(self.get(k, l));
                    self.remove(k, l, a);
                    return true;
                }
            }
        }
        // Surplus row k hands an edge over to deficit row l via m.
        for &k in &neg {
            for m in self.partners_of(k) {
                for &l in &pos {
                    if m != l && self.slack(m, l) > 0 {
                        self.remove(k, m, 1);
                        self.add(m, l, 1);
                        return true;
                    }
                }
            }
        }
        // Deficit rows k, l joined by a path k–m, m–x removed, x–l.
        for &k in &pos {
            for &l in &pos {
                if l == k && self.delta(k) < 2 {
                    continue;
                }
                let degrees: Vec<usize> = self.d.keys().copied().collect();
                for &m in &degrees {
                    if self.slack(k, m) == 0 {
                        continue;
                    }
                    for x in self.partners_of(m) {
                        self.add(k, m, 1);
                        self.remove(m, x, 1);
                        if self.slack(x, l) > 0 {
                            self.add(x, l, 1);
                            return true;
                        }
                        self.add(m, x, 1);
                        self.remove(k, m, 1);
                    }
                }
            }
        }
        // A lone surplus row sheds an edge.
        if let Some(&k) = neg.first() {
            if let Some(&m) = self.partners_of(k).first() {
                self.remove(k, m, 1);
                return true;
            }
        }
        // A lone deficit row takes an edge to the smallest degree with room.
        if let Some(&k) = pos.first() {
            let degrees: Vec<usize> = self.d.keys().copied().collect();
            for l in degrees {
                if l != k && self.slack(k, l) > 0 {
                    self.add(k, l, 1);
                    return true;
                }
            }
        }
        false
    }

    /// Gives up one node of the most-deficient degree; an odd degree takes
    /// an odd companion along to keep the total stub count even.
    fn shrink(&mut self) -> bool {
        let Some(&k) = self.rows(true).first() else {
            return false;
        };
        let dk = self.d[&k];
        if dk == 0 {
            return false;
        }
        self.set_count(k, dk - 1);
        if k % 2 == 1 {
            let companion = self
                .d
                .iter()
                .filter(|(&l, &d)| l % 2 == 1 && l != k && d > 0)
                .max_by_key(|(_, &d)| d)
                .map(|(&l, _)| l);
            match companion {
                Some(l) => {
                    let d = self.d[&l];
                    self.set_count(l, d - 1);
                }
                None if self.d[&k] > 0 => {
                    let d = self.d[&k];
                    self.set_count(k, d - 1);
                }
                None => {
                    let d = self.d[&k];
                    self.set_count(k, d + 1);
                    return false;
                }
            }
        }
        true
    }
}

/// Greedy repair to a realizable JDD.
///
/// 1. `D(k)` is rounded stochastically between `floor` and `ceil` of
///    `stubs(k)/k`, with probability given by the fractional part; one odd
///    degree is re-rounded if the total stub count would be odd.
/// 2. Entries over their caps are cut back.
/// 3. Stub imbalances are settled with the smallest moves available:
///    edges between two deficient rows, edges removed between two surplus
///    rows, then edge hand-overs, short alternating paths, and finally
///    shrinking `D(k)` for a row that cannot be filled.
pub fn repair_realizability(input: &IntJdd, seed: u64) -> Result<Repair> {
    if input.is_empty() {
        return Err(Error::RepairFailure("empty JDD".into()));
    }
    let mut jdd = IntJdd::new();
    for ((k, l), v) in input.iter() {
        if k == 0 {
            warn!("dropping {v} edges at ({k},{l}): degree-0 endpoint");
        } else {
            jdd.set(k, l, v);
        }
    }
    let mut stubs: BTreeMap<usize, u64> = BTreeMap::new();
    for ((k, l), v) in jdd.iter() {
        if k == l {
            *stubs.entry(k).or_insert(0) += 2 * v;
        } else {
            *stubs.entry(k).or_insert(0) += v;
            *stubs.entry(l).or_insert(0) += v;
        }
    }

    let mut rng = rng_from_seed(seed);
    let mut d: BTreeMap<usize, u64> = BTreeMap::new();
    for (&k, &s) in &stubs {
        let (q, r) = (s / k as u64, s % k as u64);
        let up = r > 0 && rng.random::<f64>() < r as f64 / k as f64;
        d.insert(k, q + up as u64);
    }
    let total: u64 = d.iter().map(|(&k, &c)| k as u64 * c).sum();
    if total % 2 == 1 {
        // Re-round the odd degree whose change costs the fewest stubs.
        let best = d
            .iter()
            .filter(|(&k, _)| k % 2 == 1)
            .flat_map(|(&k, &c)| {
                let s = stubs[&k] as i64;
                let now = (k as i64 * c as i64 - s).abs();
                let mut opts = vec![(k, c + 1, (k as i64 * (c as i64 + 1) - s).abs() - now)];
                if c > 0 {
                    opts.push((k, c - 1, (k as i64 * (c as i64 - 1) - s).abs() - now));
                }
                opts
            })
            .min_by_key(|&(k, _, cost)| (cost, k));
        let (k, c, _) = best.expect("an odd total needs an odd degree");
        d.insert(k, c);
    }

    let mut state = RepairState {
        j: jdd.iter().collect(),
        partners: BTreeMap::new(),
        delta: d
            .iter()
            .map(|(&k, &c)| (k, k as i64 * c as i64 - stubs[&k] as i64))
            .collect(),
        d,
    };
    for ((k, l), _) in jdd.iter() {
        state.partners.entry(k).or_default().insert(l);
        state.partners.entry(l).or_default().insert(k);
    }
    let initial = state.d.clone();
    let degrees: Vec<usize> = state.d.keys().copied().collect();
    for &k in &degrees {
        state.enforce_caps(k);
    }

    let imbalance: i64 = state.delta.values().map(|v| v.abs()).sum();
    let budget = 100_000 + 50 * imbalance as u64;
    let mut steps = 0u64;
    while state.delta.values().any(|&v| v != 0) {
        steps += 1;
        if steps > budget {
            return Err(Error::RepairFailure(format!(
                "no balanced matrix after {budget} moves; residual imbalance {}",
                state.delta.values().map(|v| v.abs()).sum::<i64>()
            )));
        }
        if !state.step() && !state.shrink() {
            let stuck: Vec<String> = state
                .delta
                .iter()
                .filter(|(_, &v)| v != 0)
                .map(|(k, v)| format!("{k}:{v:+}"))
                .collect();
            return Err(Error::RepairFailure(format!(
                "cannot balance stub counts (degree:imbalance {})",
                stuck.join(" ")
            )));
        }
    }

    let emptied: Vec<usize> = initial
        .iter()
        .filter(|&(k, &c)| c > 0 && state.d[k] == 0)
        .map(|(&k, _)| k)
        .collect();
    if !emptied.is_empty() {
        return Err(Error::RepairFailure(format!(
            "repair would remove every node of degree {emptied:?}"
        )));
    }
    let out: IntJdd = state.j.into_iter().collect();
    let report = verify_realizability(&out);
    if !report.passed() {
        let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::RepairFailure(format!("repaired matrix still invalid: {}", msgs.join("; "))));
    }
    let mut keys: BTreeSet<(usize, usize)> = input.iter().map(|(k, _)| k).collect();
    keys.extend(out.iter().map(|(k, _)| k));
    let edges_changed = keys
        .iter()
        .map(|&(k, l)| input.get(k, l).abs_diff(out.get(k, l)))
        .sum();
    let degree_counts = state.d.into_iter().filter(|&(_, c)| c > 0).collect();
    debug!("repair changed {edges_changed} edges in {steps} moves");
    Ok(Repair {
        jdd: out,
        degree_counts,
        edges_changed,
    })
}

/// Realizable generator input.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    pub jdd: IntJdd,
    pub ck: DegreeClustering,
    pub n_nodes: usize,
    pub degree_counts: BTreeMap<usize, u64>,
}

impl TargetSpec {
    /// Builds a target from a realizable JDD. `c̄(k)` keys for degrees the
    /// JDD does not contain are dropped with a warning.
    pub fn new(jdd: IntJdd, mut ck: DegreeClustering) -> Result<Self> {
        let report = verify_realizability(&jdd);
        if !report.passed() {
            return Err(Error::Input(format!("JDD is not realizable: {}", report.violations[0])));
        }
        let degree_counts: BTreeMap<usize, u64> = jdd
            .integer_degree_counts()
            .into_iter()
            .filter_map(|(k, d)| d.filter(|&d| d > 0).map(|d| (k, d)))
            .collect();
        let dropped: Vec<usize> = ck.degrees().filter(|k| !degree_counts.contains_key(k)).collect();
        if !dropped.is_empty() {
            warn!("dropping c(k) for degrees absent from the JDD: {dropped:?}");
            ck.retain(|k, _| degree_counts.contains_key(&k));
        }
        let n_nodes = degree_counts.values().sum::<u64>() as usize;
        Ok(TargetSpec {
            jdd,
            ck,
            n_nodes,
            degree_counts,
        })
    }

    pub fn edge_count(&self) -> u64 {
        self.jdd.iter().map(|(_, v)| v).sum()
    }

    /// `nodes N`, then a `jdd` section of `k l count` triples and a `ck`
    /// section of `k value` pairs.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "nodes {}", self.n_nodes)?;
        writeln!(w, "jdd")?;
        crate::io::write_jdd_lines(&self.jdd, &mut w)?;
        writeln!(w, "ck")?;
        crate::io::write_ck_lines(&self.ck, &mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R, label: &str) -> Result<Self> {
        enum Section {
            Header,
            Jdd,
            Ck,
        }
        let mut section = Section::Header;
        let mut nodes: Option<(usize, usize)> = None;
        let mut jdd = IntJdd::new();
        let mut ck = DegreeClustering::new();
        for item in content_lines(reader) {
            let (no, line) = item?;
            match line.as_str() {
                "jdd" => section = Section::Jdd,
                "ck" => section = Section::Ck,
                _ => match section {
                    Section::Header => {
                        let mut it = line.split_whitespace();
                        if it.next() != Some("nodes") {
                            return Err(parse_err(label, no, "expected `nodes N` header"));
                        }
                        nodes = Some((parse_field(it.next(), label, no, "node count")?, no));
                    }
                    Section::Jdd => {
                        let ((k, l), v) = parse_jdd_line::<u64>(&line, label, no)?;
                        jdd.add(k, l, v);
                    }
                    Section::Ck => {
                        let (k, c) = parse_ck_line(&line, label, no)?;
                        ck.insert(k, c);
                    }
                },
            }
        }
        let (n, no) = nodes.ok_or_else(|| parse_err(label, 1, "missing `nodes N` header"))?;
        let spec = TargetSpec::new(jdd, ck).map_err(|e| parse_err(label, no, e.to_string()))?;
        if spec.n_nodes != n {
            return Err(parse_err(
                label,
                no,
                format!("header says {n} nodes but the JDD implies {}", spec.n_nodes),
            ));
        }
        Ok(spec)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        self.write(create(path)?)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        Self::read(open(path)?, &path.display().to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostprocessOptions {
    pub smoothing: SmoothingOptions,
    pub smooth: bool,
    pub seed: u64,
}

impl Default for PostprocessOptions {
    fn default() -> Self {
        PostprocessOptions {
            smoothing: SmoothingOptions::default(),
            smooth: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostprocessReport {
    pub smoothed: bool,
    pub rounded_mass: u64,
    pub edges_changed: u64,
}

/// Smooth → round → repair, then attach `c̄(k)`.
pub fn postprocess(bundle: &EstimateBundle, opts: PostprocessOptions) -> Result<(TargetSpec, PostprocessReport)> {
    if bundle.jdd.is_empty() {
        return Err(Error::Input("estimate has an empty JDD".into()));
    }
    let smoothed = if opts.smooth {
        smooth_if_large(&bundle.jdd, opts.smoothing)?
    } else {
        bundle.jdd.clone()
    };
    let was_smoothed = opts.smooth && smoothed != bundle.jdd;
    let rounded = stochastic_round(&smoothed, crate::sampling::rng_stream(opts.seed, 1).random());
    if rounded.is_empty() {
        return Err(Error::RepairFailure("JDD rounds to zero edges".into()));
    }
    let rounded_mass = rounded.iter().map(|(_, v)| v).sum();
    let repair = repair_realizability(&rounded, crate::sampling::rng_stream(opts.seed, 2).random())?;
    let spec = TargetSpec::new(repair.jdd, bundle.ck.clone())?;
    Ok((
        spec,
        PostprocessReport {
            smoothed: was_smoothed,
            rounded_mass,
            edges_changed: repair.edges_changed,
        },
    ))
}
