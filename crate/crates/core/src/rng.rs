//! Reproducible random substreams.
//!
//! Every trial draws from a ChaCha8 stream keyed by `(master_seed, purpose)`
//! and selected by the trial index, so results do not depend on which worker
//! executes a trial or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream used to draw a per-trial ensemble.
pub const ENSEMBLE: u64 = 0x454e_5345_4d42_4c45;
/// Stream used to draw occupancy and received powers.
pub const TRUTH: u64 = 0x5452_5554_4800_0000;
/// Stream used for observations, shared by every policy in a trial.
pub const OBSERVATION: u64 = 0x4f42_5345_5256_0000;
/// Stream used for fixed hardware randomness (e.g. a random mixing matrix).
pub const HARDWARE: u64 = 0x4841_5244_5741_5245;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream for `(master_seed, purpose, index)`.
pub fn substream(master_seed: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    let mut state = master_seed ^ purpose.rotate_left(17);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
