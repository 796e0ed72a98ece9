//! Deterministic seed derivation for parallel Monte Carlo.
//!
//! Every trial owns a ChaCha stream addressed by (point seed, trial index,
//! hypothesis lane), so results are independent of worker scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; decorrelates structured integer inputs.
pub(crate) fn mix(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-sensitive combination of two seed words.
pub(crate) fn mix2(a: u64, b: u64) -> u64 {
    mix(a ^ mix(b))
}

/// Folds a sequence of words into one seed (order-sensitive).
pub(crate) fn mix_all(words: &[u64]) -> u64 {
    let mut acc = 0x243f_6a88_85a3_08d3u64; // arbitrary non-zero start
    for &w in words {
        acc = mix2(acc, w);
    }
    acc
}

/// RNG for one trial: a dedicated ChaCha stream under the point seed.
/// `lane` separates the H1 and H0 populations at the same trial index.
pub(crate) fn trial_rng(point_seed: u64, trial_index: u64, lane: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(point_seed);
    rng.set_stream(trial_index.wrapping_mul(2).wrapping_add(lane));
    rng
}
