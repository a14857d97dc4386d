//! Seed derivation and generator construction.
//!
//! Every random draw in the toolkit goes through a ChaCha8 stream seeded from
//! a 64-bit value, so identical seeds reproduce identical draws on every
//! platform. Sub-streams (per instance, per purpose) are derived from a master
//! seed with `derive_seed`, never by reusing the master directly.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One round of the splitmix64 output function.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the sub-seed for `index` under `master`.
///
/// The rule is fixed: `splitmix64(splitmix64(master) ^ splitmix64(index))`.
/// Chaining calls extends the rule to more than one index level, e.g.
/// `derive_seed(derive_seed(master, run), purpose)`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(index))
}

/// Builds the generator for a derived seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
