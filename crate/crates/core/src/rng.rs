//! Seed derivation for reproducible parallel work.
//!
//! Every independent work item (shot, trajectory, unitary, twirl, fold level)
//! gets its own ChaCha8 stream derived from the master seed and a tag path,
//! so results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `tags` into `seed`. Distinct tag paths give unrelated seeds.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t.wrapping_add(0x632B_E59B_D9B4_E019))))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derived_rng(seed: u64, tags: &[u64]) -> Rng {
    rng_from_seed(derive_seed(seed, tags))
}
