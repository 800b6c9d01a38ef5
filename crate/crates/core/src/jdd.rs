//! Sparse joint-degree matrices and degree-dependent clustering maps.

use std::collections::BTreeMap;
use std::fmt::{Debug, Display};
use std::ops::{Add, Sub};
use std::str::FromStr;

/// Values a [`JddMatrix`] can hold: real-valued estimates or integer counts.
pub trait JddValue:
    Copy + Default + PartialEq + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Debug + Display + FromStr
{
    fn to_f64(self) -> f64;
    fn is_zero(self) -> bool {
        self == Self::default()
    }
}

impl JddValue for f64 {
    fn to_f64(self) -> f64 {
        self
    }
}

impl JddValue for u64 {
    fn to_f64(self) -> f64 {
        self as f64
    }
}

/// Edge counts keyed by unordered degree pair `(k, l)`, `k <= l`.
///
/// A same-degree edge is stored once under `(k, k)`. The stub count of
/// degree `k` is therefore `Σ_{l≠k} JDD(k,l) + 2 JDD(k,k)`, and the implied
/// node count is that divided by `k`.
///
/// Zero entries are never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JddMatrix<V = f64> {
    entries: BTreeMap<(usize, usize), V>,
}

pub type RealJdd = JddMatrix<f64>;
pub type IntJdd = JddMatrix<u64>;

fn key(k: usize, l: usize) -> (usize, usize) {
    if k <= l {
        (k, l)
    } else {
        (l, k)
    }
}

impl<V: JddValue> JddMatrix<V> {
    pub fn new() -> Self {
        JddMatrix {
            entries: BTreeMap::new(),
        }
    }

    pub fn get(&self, k: usize, l: usize) -> V {
        self.entries.get(&key(k, l)).copied().unwrap_or_default()
    }

    /// Stores `value` at `(k, l)`; storing zero removes the entry.
    pub fn set(&mut self, k: usize, l: usize, value: V) {
        if value.is_zero() {
            self.entries.remove(&key(k, l));
        } else {
            self.entries.insert(key(k, l), value);
        }
    }

    pub fn add(&mut self, k: usize, l: usize, value: V) {
        let v = self.get(k, l) + value;
        self.set(k, l, v);
    }

    /// Entries as `((k, l), value)` with `k <= l`, in key order.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), V)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of edges represented.
    pub fn total_mass(&self) -> f64 {
        self.entries.values().map(|v| v.to_f64()).sum()
    }

    /// Every degree appearing in some key, ascending.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.entries.keys().flat_map(|&(k, l)| [k, l]).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// Stub count per degree.
    pub fn stub_counts(&self) -> BTreeMap<usize, f64> {
        let mut r = BTreeMap::new();
        for (&(k, l), v) in &self.entries {
            let x = v.to_f64();
            if k == l {
                *r.entry(k).or_insert(0.0) += 2.0 * x;
            } else {
                *r.entry(k).or_insert(0.0) += x;
                *r.entry(l).or_insert(0.0) += x;
            }
        }
        r
    }

    /// Implied node count per degree, `D(k) = stubs(k) / k`. Degree-0 keys
    /// (which carry no stubs) are skipped.
    pub fn degree_counts(&self) -> BTreeMap<usize, f64> {
        self.stub_counts()
            .into_iter()
            .filter(|&(k, _)| k > 0)
            .map(|(k, s)| (k, s / k as f64))
            .collect()
    }

    pub fn to_real(&self) -> RealJdd {
        JddMatrix {
            entries: self.entries.iter().map(|(&k, v)| (k, v.to_f64())).collect(),
        }
    }

    /// `(k, l)` → value for every stored entry, for NMAE-style comparison.
    pub fn as_vector(&self) -> BTreeMap<(usize, usize), f64> {
        self.entries.iter().map(|(&k, v)| (k, v.to_f64())).collect()
    }
}

impl<V: JddValue> FromIterator<((usize, usize), V)> for JddMatrix<V> {
    fn from_iter<I: IntoIterator<Item = ((usize, usize), V)>>(iter: I) -> Self {
        let mut m = JddMatrix::new();
        for ((k, l), v) in iter {
            m.add(k, l, v);
        }
        m
    }
}

impl IntJdd {
    /// Integer degree counts, or `None` for a degree whose stub count is not
    /// a multiple of the degree.
    pub fn integer_degree_counts(&self) -> BTreeMap<usize, Option<u64>> {
        let mut stubs: BTreeMap<usize, u64> = BTreeMap::new();
        for ((k, l), v) in self.iter() {
            if k == l {
                *stubs.entry(k).or_insert(0) += 2 * v;
            } else {
                *stubs.entry(k).or_insert(0) += v;
                *stubs.entry(l).or_insert(0) += v;
            }
        }
        stubs
            .into_iter()
            .map(|(k, s)| {
                let d = if k == 0 {
                    None
                } else if s % k as u64 == 0 {
                    Some(s / k as u64)
                } else {
                    None
                };
                (k, d)
            })
            .collect()
    }
}

impl RealJdd {
    /// Drops entries at or below `eps`.
    pub fn prune(&mut self, eps: f64) {
        self.entries.retain(|_, v| *v > eps);
    }

    pub fn scale(&mut self, factor: f64) {
        for v in self.entries.values_mut() {
            *v *= factor;
        }
        self.prune(0.0);
    }
}

/// Mean clustering per degree, `c̄(k)`. Keys are degrees `k >= 2`, values in
/// `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DegreeClustering {
    values: BTreeMap<usize, f64>,
}

impl DegreeClustering {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `c̄(k)`, clamping into `[0, 1]`. Returns true if the value had
    /// to be clamped. Degrees below 2 are ignored.
    pub fn insert(&mut self, k: usize, value: f64) -> bool {
        if k < 2 || value.is_nan() {
            return false;
        }
        let c = value.clamp(0.0, 1.0);
        self.values.insert(k, c);
        c != value
    }

    pub fn get(&self, k: usize) -> Option<f64> {
        self.values.get(&k).copied()
    }

    pub fn remove(&mut self, k: usize) -> Option<f64> {
        self.values.remove(&k)
    }

    pub fn contains(&self, k: usize) -> bool {
        self.values.contains_key(&k)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn retain(&mut self, mut f: impl FnMut(usize, f64) -> bool) {
        self.values.retain(|&k, v| f(k, *v));
    }

    pub fn as_map(&self) -> &BTreeMap<usize, f64> {
        &self.values
    }
}

impl FromIterator<(usize, f64)> for DegreeClustering {
    fn from_iter<I: IntoIterator<Item = (usize, f64)>>(iter: I) -> Self {
        let mut c = DegreeClustering::new();
        for (k, v) in iter {
            c.insert(k, v);
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_unordered() {
        let mut j = IntJdd::new();
        j.add(5, 2, 3);
        j.add(2, 5, 1);
        assert_eq!(j.get(5, 2), 4);
        assert_eq!(j.iter().collect::<Vec<_>>(), vec![((2, 5), 4)]);
        j.set(2, 5, 0);
        assert!(j.is_empty());
    }

    #[test]
    fn degree_counts_use_single_count_diagonal() {
        // Path on four nodes: two leaves, two degree-2 nodes.
        let j: IntJdd = [((1, 2), 2u64), ((2, 2), 1)].into_iter().collect();
        let d = j.degree_counts();
        assert_eq!(d[&1], 2.0);
        assert_eq!(d[&2], 2.0);
        let di = j.integer_degree_counts();
        assert_eq!(di[&2], Some(2));
        let bad: IntJdd = [((1, 2), 1u64)].into_iter().collect();
        assert_eq!(bad.integer_degree_counts()[&2], None);
    }

    #[test]
    fn clustering_clamps_and_skips_low_degrees() {
        let mut c = DegreeClustering::new();
        assert!(c.insert(3, 1.2));
        assert!(!c.insert(4, 0.5));
        assert!(!c.insert(1, 0.5));
        assert_eq!(c.get(3), Some(1.0));
        assert_eq!(c.len(), 2);
    }
}
