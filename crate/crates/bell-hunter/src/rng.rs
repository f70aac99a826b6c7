//! Deterministic random streams.
//!
//! Every stochastic routine in this crate takes an explicit [`RandomStream`].
//! A stream is a counter-seeded ChaCha8 generator; independent substreams are
//! derived by mixing a master seed with a path of indices (experiment point,
//! state index, trajectory index, ...). Derivation is pure, so parallel
//! workers can build their own streams without any shared state and results
//! do not depend on scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream purpose tags, kept distinct so that e.g. state sampling and
/// trajectory noise never share a substream.
pub mod purpose {
    pub const STATE: u64 = 1;
    pub const TRAJECTORY: u64 = 2;
    pub const SEESAW: u64 = 3;
    pub const TEST: u64 = 99;
}

#[derive(Debug, Clone)]
pub struct RandomStream(ChaCha8Rng);

/// SplitMix64 finalizer; good avalanche, cheap, stable across platforms.
#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RandomStream {
    /// Stream keyed by a bare seed.
    pub fn seeded(seed: u64) -> Self {
        Self::substream(seed, &[])
    }

    /// Stream keyed by `(master_seed, path...)`. Distinct paths give
    /// statistically independent streams.
    pub fn substream(master_seed: u64, path: &[u64]) -> Self {
        let mut state = master_seed ^ 0x6a09_e667_f3bc_c908;
        let mut key = [0u8; 32];
        // Fold the path into the mixer state, then squeeze out the key.
        for &part in path {
            state ^= splitmix64(&mut { part ^ state });
            splitmix64(&mut state);
            state = state.wrapping_add(part).rotate_left(23);
        }
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        RandomStream(ChaCha8Rng::from_seed(key))
    }
}

impl RngCore for RandomStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    #[inline]
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }
}
