//! Seeded random streams. Every consumer of randomness draws from its own
//! ChaCha stream so that adding a draw in one place never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Independent stream identifiers used across the crate.
pub mod streams {
    pub const GENERATOR_INIT: u64 = 1;
    pub const DISCRIMINATOR_INIT: u64 = 2;
    pub const INTERIOR: u64 = 3;
    /// Boundary term `i` uses `BOUNDARY + i`.
    pub const BOUNDARY: u64 = 100;
    pub const LABELED: u64 = 4;
    pub const TEST_SET: u64 = 5;
    /// DGM mini-batch draws for epoch `k` use `(MINIBATCH << 32) | k`.
    pub const MINIBATCH: u64 = 6;
}

pub fn stream_rng(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
