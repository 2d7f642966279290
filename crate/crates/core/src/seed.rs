//! Deterministic seed derivation.
//!
//! Seeds are mixed with SplitMix64 so that derived streams are stable across
//! platforms and toolchain versions (unlike `std::hash`).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random source used throughout the crate.
pub type Rng = ChaCha8Rng;

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Combines a parent seed with a tag into a child seed.
pub fn derive(parent: u64, tag: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ tag.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

pub mod tags {
    pub const USER_POSITION: u64 = 1;
    pub const TRAIN_SET: u64 = 2;
    pub const EVAL_SET: u64 = 3;
    pub const INIT_POINT: u64 = 4;
    pub const SGD: u64 = 5;
}
