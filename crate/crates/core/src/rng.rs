//! Seeded randomness.
//!
//! Every random draw in the crate comes from ChaCha8, a counter-based stream
//! cipher generator: `seed` selects the key and `stream` selects one of 2^64
//! independent streams. Independent tasks (restarts, pairs, samples) use
//! their index as the stream, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for the unordered pair `(i, j)` of an `n`-element corpus.
pub fn pair_stream(i: usize, j: usize) -> u64 {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    ((a as u64) << 32) | (b as u64)
}
