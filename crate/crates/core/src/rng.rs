//! Seed derivation for reproducible runs.
//!
//! Every stochastic unit of work (a trial, a balls-into-bins run, an outer
//! sample batch) owns an independent generator. Its seed is
//! `splitmix64(master_seed ^ unit_index)` and the generator is ChaCha8
//! seeded through `SeedableRng::seed_from_u64`. Both steps are fixed, so a
//! `(master_seed, unit_index)` pair always yields the same stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// One step of the SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn substream_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ index)
}

pub fn substream(master_seed: u64, index: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(substream_seed(master_seed, index))
}

pub fn from_seed(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}
