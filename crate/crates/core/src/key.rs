//! Keyed deterministic randomness.
//!
//! One 64-bit seed drives every random choice in the pipeline through
//! independent streams of a counter-based generator, so embedder and
//! extractor reproduce the same pixel permutation and code structure from
//! the seed alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Embedding/extraction key: a single 64-bit seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StegoKey {
    seed: u64,
}

/// The fixed substreams carved out of a key.
#[derive(Clone, Copy, Debug)]
pub(crate) enum KeyStream {
    Permutation = 0,
    Submatrix = 1,
    Direction = 2,
    Simulator = 3,
}

impl StegoKey {
    pub fn new(seed: u64) -> Self {
        StegoKey { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub(crate) fn rng(&self, stream: KeyStream) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(stream as u64);
        rng
    }

    /// Key-derived permutation of 0..len (Fisher-Yates).
    pub(crate) fn permutation(&self, len: usize) -> Vec<u32> {
        let mut rng = self.rng(KeyStream::Permutation);
        let mut order: Vec<u32> = (0..len as u32).collect();
        for i in (1..len).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        order
    }
}
