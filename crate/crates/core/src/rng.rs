//! Reproducible random streams.
//!
//! All randomness flows through ChaCha8, a counter-based generator: a 64-bit
//! seed selects the key and the realization index selects an independent
//! stream, so realizations can run on any worker in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for stream `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Stream index for realization `realization` of sweep point `point`.
pub fn stream_index(point: usize, realization: usize) -> u64 {
    ((point as u64) << 32) | realization as u64
}
