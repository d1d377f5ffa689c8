use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

/// Seeded random source for the sampler.
///
/// The generator is xoshiro256++ seeded through SplitMix64
/// (`Xoshiro256PlusPlus::seed_from_u64`). Derived draws are defined here
/// rather than borrowed from a distribution library so the exact sequence
/// is pinned by this file:
///
/// * `below(n)`: rejection sampling on raw 64-bit outputs, accepting
///   `x < 2^64 - (2^64 mod n)` and returning `x mod n`.
/// * `unit()`: the top 53 bits of one output scaled by 2^-53, in [0, 1).
/// * `range(a, b)`: `a + (b - a) * unit()`, or `a` when `a == b`.
pub struct ScenarioRng {
    inner: Xoshiro256PlusPlus,
}

impl ScenarioRng {
    pub fn new(seed: u64) -> Self {
        ScenarioRng {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `0..n`. Panics when `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "empty range");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n + 1) % n;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return (x % n) as usize;
            }
        }
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        if lo == hi {
            lo
        } else {
            lo + (hi - lo) * self.unit()
        }
    }

    /// Uniform integer in `lo..=hi`.
    pub fn range_inclusive(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.below(hi - lo + 1)
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }
}
