//! Seed derivation for reproducible, schedule-independent random streams.
//!
//! Every trial, process copy or sampled object draws from its own ChaCha8
//! generator seeded with `derive_seed(seed, index)`. The derivation is the
//! SplitMix64 finalizer applied twice:
//!
//! ```text
//! derive_seed(seed, index) = mix64(seed ^ mix64(index + 0x9E3779B97F4A7C15))
//! ```
//!
//! so an external tool can reproduce any single trial from the top-level
//! seed and the trial index alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator type used throughout the crate.
pub type StreamRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Tag mixed into seeds used for auxiliary sampling (pair selection, subset
/// selection) so those streams never coincide with trial streams.
pub(crate) const AUX_TAG: u64 = 0xA5A5_5A5A_C3C3_3C3C;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th derived stream.
#[inline]
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index.wrapping_add(GOLDEN_GAMMA)))
}

/// Generator for a top-level seed.
pub fn rng_from_seed(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for the `index`-th derived stream of `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, index))
}
