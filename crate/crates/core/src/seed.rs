//! Seed derivation and RNG construction.
//!
//! Every random stream in the crate is a `ChaCha8Rng` seeded from a `u64`.
//! Child seeds come from a counter-based SplitMix64 mix so that the seed of
//! one stream never depends on how many other streams were drawn.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `parent` and a path of counters.
pub fn derive(parent: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix(parent), |acc, &c| splitmix(acc ^ splitmix(c)))
}

/// FNV-1a over a byte string, for turning labels into seed counters.
pub fn label_hash(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}
