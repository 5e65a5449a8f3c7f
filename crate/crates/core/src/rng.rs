//! Seedable, portable random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by the
//! user seed and a 64-bit stream id. Stream ids are derived from a domain tag
//! and a sequence of indices (a tree path, a chunk number, a pair number) with
//! [`stream_id`], so the same `(seed, tag, indices)` always yields the same
//! numbers regardless of platform, thread count or evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Domain tags keep unrelated consumers of the same seed on disjoint streams.
pub mod tag {
    pub const TREE: u64 = 1;
    pub const SIGNS: u64 = 2;
    pub const PERMS: u64 = 3;
    pub const OPERATORS: u64 = 4;
    pub const MC_CHUNK: u64 = 5;
    pub const BOOTSTRAP: u64 = 6;
    pub const PIPELINE: u64 = 7;
    pub const PAIR: u64 = 8;
    pub const GLOBAL_SIGN: u64 = 9;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a tag and an index sequence into a stream id.
///
/// The length is mixed in first so that the root path `[]` and the path `[0]`
/// map to different streams.
pub fn stream_id(tag: u64, indices: &[usize]) -> u64 {
    let mut h = splitmix64(tag ^ 0x5eed_0000_0000_0000);
    h = splitmix64(h ^ indices.len() as u64);
    for &i in indices {
        h = splitmix64(h ^ (i as u64).wrapping_add(1));
    }
    h
}

/// Generator for `(seed, tag, indices)`.
pub fn stream(seed: u64, tag: u64, indices: &[usize]) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(tag, indices));
    rng
}

/// Derives a child seed, used to give each generated pair its own seed.
pub fn derive_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ stream_id(tag::PAIR, &[index]))
}
