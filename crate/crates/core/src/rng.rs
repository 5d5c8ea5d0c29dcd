//! Deterministic seeding.
//!
//! Every random stream in an experiment is a `ChaCha8Rng` whose seed is a pure
//! function of the master seed and a small tuple of stream coordinates, so
//! records do not depend on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `(cell, index)` under `master`.
pub fn derive_seed(master: u64, cell: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ cell) ^ index)
}
