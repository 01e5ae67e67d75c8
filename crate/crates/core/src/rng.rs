//! Seeded random streams.
//!
//! Every stochastic stage of the pipeline draws from its own ChaCha stream
//! derived from a single trial seed, so stages cannot perturb each other's
//! draws and a trial is reproducible from one integer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named sub-streams of a trial seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Synthetic = 1,
    Filter = 2,
    Init = 3,
    Dropout = 4,
    Folds = 5,
}

/// Returns the ChaCha stream for `(seed, stream)`.
pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
