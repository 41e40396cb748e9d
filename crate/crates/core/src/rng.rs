//! Seeded random streams.
//!
//! A run owns one root seed. Each consumer (environment transitions, action
//! sampling, block selection, output selection, evaluation) draws from its own
//! ChaCha stream so that extra draws in one consumer never shift another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Fixed stream identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Environment = 0,
    Policy = 1,
    BlockSelection = 2,
    OutputSelection = 3,
    EvalEnvironment = 4,
    EvalPolicy = 5,
    Oracle = 6,
}

pub fn stream(root_seed: u64, id: Stream) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream(id as u64);
    rng
}
