//! Seeded, reproducible random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] derived from an
//! [`RngSeed`]. Independent consumers (channel, Alice, Bob, Eve, photon
//! statistics) get their own substream keyed by round index and role, so the
//! outcome of one round never depends on how many draws another one made.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

/// Who consumes a substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamRole {
    Channel,
    Alice,
    Bob,
    Eve,
    Photon,
}

impl StreamRole {
    fn tag(self) -> u64 {
        match self {
            StreamRole::Channel => 1,
            StreamRole::Alice => 2,
            StreamRole::Bob => 3,
            StreamRole::Eve => 4,
            StreamRole::Photon => 5,
        }
    }
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngSeed {
    pub fn rng(self) -> StreamRng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Child seed for `(index, role)`. Distinct inputs give unrelated streams.
    pub fn derive(self, index: u64, role: StreamRole) -> RngSeed {
        RngSeed(mix(mix(self.0 ^ mix(index)) ^ role.tag()))
    }

    pub fn stream(self, index: u64, role: StreamRole) -> StreamRng {
        self.derive(index, role).rng()
    }
}

impl From<u64> for RngSeed {
    fn from(v: u64) -> Self {
        RngSeed(v)
    }
}
