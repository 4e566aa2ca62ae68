//! Seed derivation for independent random substreams.
//!
//! Sampling results must not depend on the order minibatches or nodes are
//! visited in, so every consumer of randomness gets its own stream keyed by
//! a tuple of labels (epoch seed, minibatch index, layer, node id, ...).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Collapses a tuple of stream labels into a single 64-bit seed.
pub(crate) fn stream_seed(parts: &[u64]) -> u64 {
    let mut state = 0x243F_6A88_85A3_08D3;
    let mut acc = 0u64;
    for &p in parts {
        state ^= p;
        acc = acc.rotate_left(23) ^ splitmix64(&mut state);
    }
    acc
}

pub(crate) fn stream_rng(parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(parts))
}
