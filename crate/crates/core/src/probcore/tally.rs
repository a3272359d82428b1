use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::info::neg_xlog2x;

/// Sparse counts over fixed-arity tuples of symbol indices.
///
/// Used for plug-in estimates when one coordinate (a bin index, say) ranges
/// over far more values than could be tabulated densely.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tally {
    arity: usize,
    counts: BTreeMap<Vec<u64>, u64>,
    total: u64,
}

impl Tally {
    pub fn new(arity: usize) -> Self {
        Tally {
            arity,
            counts: BTreeMap::new(),
            total: 0,
        }
    }

    pub fn add(&mut self, tuple: &[u64]) {
        assert_eq!(tuple.len(), self.arity, "tuple arity");
        *self.counts.entry(tuple.to_vec()).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u64], u64)> {
        self.counts.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    /// Plug-in entropy (bits) of the empirical marginal on `coords`.
    pub fn entropy(&self, coords: &[usize]) -> f64 {
        if self.total == 0 || coords.is_empty() {
            return 0.0;
        }
        let mut marginal: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
        for (k, &v) in &self.counts {
            let key = coords.iter().map(|&c| k[c]).collect();
            *marginal.entry(key).or_insert(0) += v;
        }
        let n = self.total as f64;
        marginal.values().map(|&c| neg_xlog2x(c as f64 / n)).sum()
    }

    /// Plug-in `I(A; B | C)` in bits.
    pub fn cond_mutual_info(&self, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
        let cat = |x: &[usize], y: &[usize]| -> Vec<usize> { x.iter().chain(y).copied().collect() };
        let ac = cat(a, c);
        let bc = cat(b, c);
        let abc = cat(&ac, b);
        self.entropy(&ac) + self.entropy(&bc) - self.entropy(&abc) - self.entropy(c)
    }
}
