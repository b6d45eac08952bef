//! Reproducible random streams.
//!
//! Every stochastic operation in this crate takes an explicit [`Stream`].
//! A stream is a ChaCha12 generator keyed by a root seed and a path of
//! integer tags, combined with the splitmix64 finalizer. Substreams with
//! distinct paths are statistically independent, and the derivation is a
//! pure function of `(root, path)`, so any run can be replayed exactly.
//!
//! The harness derives one substream per (purpose, seed, episode). Exogenous
//! trace streams are keyed by `(seed, episode)` only, never by algorithm, so
//! all algorithms sharing a seed see identical exogenous draws (common
//! random numbers).

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The crate's named generator: ChaCha12, 64-bit seeded.
pub type Stream = ChaCha12Rng;

/// splitmix64 finalizer; the standard 64-bit avalanche mix.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the 64-bit key for `(root, path)`. Order-sensitive.
pub fn derive_key(root: u64, path: &[u64]) -> u64 {
    let mut state = mix(root ^ 0x1234_5678_9abc_def0);
    for &tag in path {
        state = mix(state ^ mix(tag));
    }
    state
}

/// A substream for the given root seed and tag path.
pub fn substream(root: u64, path: &[u64]) -> Stream {
    ChaCha12Rng::seed_from_u64(derive_key(root, path))
}

/// Purpose tags used by the harness when splitting streams.
pub mod tag {
    /// Environment construction (tabular benchmark draw).
    pub const ENV: u64 = 1;
    /// Exogenous trace of one episode (shared across algorithms).
    pub const TRACE: u64 = 2;
    /// Algorithm-private randomness (e.g. subsampling).
    pub const ALGO: u64 = 3;
    /// Policy-evaluation rollouts.
    pub const EVAL: u64 = 4;
}
