//! Keyed random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream
//! addressed by a `(seed, stream)` pair. Two calls with the same pair see the
//! same numbers regardless of thread scheduling, which is what lets replicate
//! `r` of a simulation be recomputed in isolation.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Identifies the generator and the sampling algorithms layered on it.
/// Changing either is a breaking change for every pinned seed.
pub const GENERATOR_VERSION: &str = "chacha8-stream/lemire-bounded/partial-fisher-yates v1";

/// A factory for independent streams derived from one 64-bit seed.
#[derive(Clone)]
pub struct StreamFactory {
    base: ChaCha8Rng,
}

impl StreamFactory {
    pub fn new(seed: u64) -> Self {
        Self { base: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// The stream with the given index, positioned at its start.
    pub fn stream(&self, index: u64) -> Stream {
        let mut rng = self.base.clone();
        rng.set_stream(index);
        rng.set_word_pos(0);
        Stream { rng }
    }
}

pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on the open interval (0, 1), 53 bits of resolution.
    #[inline]
    pub fn open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased integer in `0..bound` (Lemire's multiply-and-reject).
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let mut m = u128::from(self.next_u64()) * u128::from(bound);
        if (m as u64) < bound {
            let threshold = bound.wrapping_neg() % bound;
            while (m as u64) < threshold {
                m = u128::from(self.next_u64()) * u128::from(bound);
            }
        }
        (m >> 64) as u64
    }
}

/// SplitMix64 finalizer, used to derive sub-seeds from a master seed.
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    let mut z = master ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
