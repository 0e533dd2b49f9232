//! Seed derivation and the random generator used throughout the crate.
//!
//! Every generator is a [`ChaCha8Rng`] (the 8-round ChaCha stream cipher),
//! which produces the same stream on every platform for a given 64-bit seed.
//! Sub-seeds are derived with the SplitMix64 finalizer, so the seed of a
//! Monte-Carlo trial depends only on `(master, cell, trial)` and never on the
//! order in which trials are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for all random draws.
pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Stable mix of a seed with one index.
pub fn derive(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Seed of trial `trial` in cell `cell` of an experiment.
pub fn trial_seed(master: u64, cell: u64, trial: u64) -> u64 {
    derive(derive(master, cell), trial)
}
