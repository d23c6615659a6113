use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A reproducible random stream identified by `(root_seed, stream_id)`.
///
/// ChaCha is counter-based: every draw is a function of the key (derived
/// from `root_seed`), the stream nonce and the block counter, so equal
/// contracts yield identical sequences regardless of scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomnessContract {
    pub root_seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RandomnessContract {
    pub fn new(root_seed: u64, stream_id: u64) -> Self {
        RandomnessContract { root_seed, stream_id }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root_seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Child stream for batch or sub-task `index`; same root seed.
    pub fn substream(&self, index: u64) -> Self {
        RandomnessContract {
            root_seed: self.root_seed,
            stream_id: splitmix64(splitmix64(self.stream_id) ^ index),
        }
    }
}
