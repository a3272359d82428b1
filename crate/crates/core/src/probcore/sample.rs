use alloc::vec::Vec;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use super::joint::validate_masses;
use crate::Result;

/// Master seed for every randomized routine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Seed(pub u64);

impl Seed {
    /// Independent sub-stream number `index` of this seed.
    ///
    /// Split rule: ChaCha12 keyed by `seed_from_u64(seed)` with its 64-bit
    /// stream id set to `index`. Streams never overlap, and a given
    /// `(seed, index)` always yields the same sequence.
    pub fn stream(self, index: u64) -> SeedStream {
        let mut rng = ChaCha12Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        SeedStream(rng)
    }
}

/// A reproducible random stream derived from a [`Seed`].
#[derive(Debug, Clone)]
pub struct SeedStream(ChaCha12Rng);

impl SeedStream {
    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform draw from `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n` (unbiased, widening-multiply rejection).
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let zone = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= zone {
                return (m >> 64) as u64;
            }
        }
    }

    /// Uniform draw from `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Index selected by `u ∈ [0,1)` under the cumulative sum of `weights`.
pub(crate) fn inverse_cdf(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// A categorical distribution with a precomputed CDF for repeated draws.
#[derive(Debug, Clone, PartialEq)]
pub struct Categorical {
    cdf: Vec<f64>,
    last_positive: usize,
}

impl Categorical {
    pub fn new(weights: &[f64]) -> Result<Self> {
        validate_masses(weights, &|| "categorical weights".into())?;
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|&w| {
                acc += w;
                acc
            })
            .collect();
        let last_positive = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
        Ok(Categorical { cdf, last_positive })
    }

    pub fn sample(&self, rng: &mut SeedStream) -> usize {
        let u = rng.next_f64();
        // first index whose cumulative mass exceeds u; zero-weight cells are never hit
        let i = self.cdf.partition_point(|&c| c <= u);
        i.min(self.last_positive)
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }
}
