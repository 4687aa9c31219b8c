//! Seeded randomness.
//!
//! Every random decision draws from a ChaCha8 stream seeded with a value
//! derived from the master seed and the decision's coordinates (aspect,
//! technique, story position). Candidate lists are sorted before drawing so
//! the same seed selects the same item on every platform.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StoryRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> StoryRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a sequence of coordinates into a case seed.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(master), |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}

/// Uniform choice; `None` on an empty slice.
pub fn choose<'a, T, R: Rng + ?Sized>(rng: &mut R, items: &'a [T]) -> Option<&'a T> {
    if items.is_empty() {
        None
    } else {
        Some(&items[rng.gen_range(0..items.len())])
    }
}

/// `k` distinct indices from `0..n`, returned in ascending order.
pub fn sample_indices<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let k = k.min(n);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
    let mut picked = pool[..k].to_vec();
    picked.sort_unstable();
    picked
}

// Rates multiply small integer counts; the epsilon absorbs products such as
// 0.1 * 45 landing a hair under the half.
const ROUNDING_EPS: f64 = 1e-9;

/// `max(1, round_half_up(rate * base))`.
pub fn rate_count(rate: f64, base: usize) -> usize {
    let raw = libm::floor(rate * base as f64 + 0.5 + ROUNDING_EPS) as usize;
    raw.max(1)
}

/// `max(1, floor(rate * base))`.
pub fn floor_count(rate: f64, base: usize) -> usize {
    let raw = libm::floor(rate * base as f64 + ROUNDING_EPS) as usize;
    raw.max(1)
}
