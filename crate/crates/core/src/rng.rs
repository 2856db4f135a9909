//! Reproducible random streams.
//!
//! All generated data goes through SplitMix64 (64-bit state, Steele/Lea/Flood
//! constants) and the two derivation rules below, so a seed produces the same
//! bits on every platform and toolchain.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

/// Name and version recorded in reports next to every seed.
pub const GENERATOR: &str = "splitmix64/v1";

#[derive(Clone, Debug)]
pub struct FieldRng {
    inner: SplitMix64,
}

impl FieldRng {
    pub fn new(seed: u64) -> Self {
        FieldRng {
            inner: SplitMix64::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit_f64()
    }

    /// Uniform integer in `[0, bound)` by rejection on the largest multiple of `bound`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }

    /// Uniform integer in `[lo, hi)`.
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo < hi, "empty range");
        lo + self.below((hi - lo) as u64) as i64
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
