//! Reproducible random streams.
//!
//! Every sampler in this crate draws from a [`RandomStream`]: a (seed,
//! stream index) pair that instantiates a counter-mode ChaCha generator.
//! Identical pairs replay identical draw sequences on every platform, and
//! substreams are derived by a fixed 64-bit mix, so a parallel run splits
//! work without any dependence on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_index: u64,
}

/// SplitMix64 finalizer; bijective on u64.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            stream_index: 0,
        }
    }

    pub fn with_index(seed: u64, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    /// Child stream `i`. The derivation mixes the parent index with `i`, so
    /// children of distinct parents occupy effectively disjoint index sets.
    pub fn substream(&self, i: u64) -> Self {
        Self {
            seed: self.seed,
            stream_index: mix(self.stream_index ^ mix(i.wrapping_add(1))),
        }
    }

    /// Instantiate the generator at this stream position.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }
}
