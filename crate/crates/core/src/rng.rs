//! Seeded random number generation.
//!
//! Every stochastic decision in the crate draws from [`Rng`], which is
//! xoshiro256** seeded through SplitMix64 (Blackman & Vigna's reference
//! construction). Derived quantities are pinned here as well so that a run
//! can be replayed by any implementation of the same generator:
//!
//! * `next_f64` takes the top 53 bits: `(x >> 11) * 2^-53`, in `[0, 1)`.
//! * `below(n)` uses rejection on `x % n` with the threshold
//!   `(2^64 - n) % n`, so results are unbiased and platform independent.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

#[derive(Debug, Clone)]
pub struct Rng {
    inner: Xoshiro256StarStar,
}

/// Deterministic generator for `seed`.
pub fn make_rng(seed: u64) -> Rng {
    Rng {
        inner: Xoshiro256StarStar::seed_from_u64(seed),
    }
}

impl Rng {
    /// Generator with an explicit 256-bit state (four little-endian words).
    pub fn from_state(state: [u64; 4]) -> Self {
        let mut bytes = [0u8; 32];
        for (chunk, word) in bytes.chunks_exact_mut(8).zip(state) {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        Rng {
            inner: Xoshiro256StarStar::from_seed(bytes),
        }
    }

    /// Advances the state by 2^128 draws. Used to carve a second,
    /// non-overlapping stream out of one seed.
    pub fn jumped(mut self) -> Self {
        self.inner.jump();
        self
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`. Panics if `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return (x % n) as usize;
            }
        }
    }

    /// Bernoulli draw; consumes one `next_f64`.
    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Fisher-Yates, walking from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        self.shuffle(&mut idx);
        idx
    }
}

impl RngCore for Rng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// SplitMix64, the seeding generator. Exposed for test vectors.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
