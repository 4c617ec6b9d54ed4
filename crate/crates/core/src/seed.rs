//! Counter-based seed derivation.
//!
//! Every stochastic component derives its stream from a master seed and a
//! small tuple of counters, so results never depend on scheduling order.

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

/// Mixes `master` with a stream tag and an index.
pub fn derive(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(stream)).wrapping_add(index))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub mod streams {
    pub const RESAMPLE: u64 = 1;
    pub const MODEL: u64 = 2;
    pub const TREE: u64 = 3;
    pub const FOLDS: u64 = 4;
    pub const STACK_BASE: u64 = 5;
    pub const STACK_META: u64 = 6;
    pub const SVM_SUBSAMPLE: u64 = 7;
    pub const SYNTH: u64 = 8;
}
