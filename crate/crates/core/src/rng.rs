//! Deterministic, splittable random streams.
//!
//! Every operation derives its generators from a `u64` seed plus a stream
//! label, so that the draws feeding one impairment never shift when another
//! impairment is toggled.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Independent sub-stream `stream` of the generator keyed by `seed`.
pub fn substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A child seed for a nested operation.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    // Stream numbers above 2^32 are reserved for seed derivation so they never
    // collide with the small labels used for direct sub-streams.
    substream(seed, (1 << 32) | label).next_u64()
}
