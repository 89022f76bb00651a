//! Seeding rules. Every random draw in the crate comes from a ChaCha12
//! stream built here, so results are portable across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type Rng = ChaCha12Rng;

/// Generator for a single seeded computation.
pub fn from_seed(seed: u64) -> Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// A 64-bit seed for replication `index`, for APIs that take a plain seed.
///
/// `splitmix64(master) ^ index` run through another splitmix64 round; the map
/// is a bijection in `index` for fixed `master`.
pub fn replication_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index)
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
