//! Seed derivation for reproducible, independently seeded sub-streams.
//!
//! Every randomized stage (permutation `a` of grid cell `(k, s)`, group `t`
//! of a simulated dataset, ...) draws from its own ChaCha stream whose seed
//! is derived from the base seed and the stage tags. Grid cells and
//! replicates can therefore run in any order, or in parallel, and still
//! reproduce bit-identical results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a base seed with a sequence of tags into a new 64-bit seed.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut state = base;
    let mut out = splitmix64(&mut state);
    for &t in tags {
        state ^= t;
        out ^= splitmix64(&mut state).rotate_left(17);
    }
    out
}

/// A reproducible RNG for the sub-stream identified by `tags`.
pub fn stream(base: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, tags))
}

/// Tag for an `f64`-valued coordinate of a stream name (e.g. sparsity `s`).
pub fn tag_f64(x: f64) -> u64 {
    x.to_bits()
}
