//! Seed derivation so every randomized step traces back to one global seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a stable component tag.
pub fn derive(seed: u64, tag: &str) -> u64 {
    tag.bytes()
        .fold(mix(seed.wrapping_add(GOLDEN)), |acc, b| {
            mix(acc ^ u64::from(b)).wrapping_add(GOLDEN)
        })
}

/// Derive a child seed for the `index`-th repetition of a component.
pub fn derive_indexed(seed: u64, tag: &str, index: u64) -> u64 {
    mix(derive(seed, tag) ^ mix(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
