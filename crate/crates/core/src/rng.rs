//! Seeded random streams.
//!
//! Every stochastic component draws from a ChaCha8 stream so results are
//! reproducible across platforms and crate upgrades. Sub-streams are derived
//! from `(seed, index)` so parallel work never depends on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent seed for task `index` under `seed` (splitmix64 mix).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derived(seed: u64, index: u64) -> Rng {
    seeded(derive_seed(seed, index))
}
