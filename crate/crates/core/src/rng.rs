//! Seeded random streams.
//!
//! Every random draw in a run comes from a logical stream identified by
//! `(seed, client, round, purpose)`. Streams are ChaCha12 instances: the base
//! seed is expanded into the cipher key and the remaining triple is packed into
//! the 64-bit stream id, so two streams never share keystream. Within a stream,
//! [`RngSeed::coordinate`] positions the generator at a fixed offset per vector
//! coordinate, which makes draws for coordinate `j` independent of how many
//! words coordinate `j - 1` consumed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// What a stream is used for. Part of the stream identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Purpose {
    Quantize = 1,
    Binomial = 2,
    Data = 3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamId {
    pub client: u32,
    pub round: u32,
    pub purpose: Purpose,
}

/// A base seed plus the stream it selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: StreamId,
}

const MAX_CLIENT: u32 = 1 << 24;
/// Words reserved per coordinate sub-stream.
const COORDINATE_SHIFT: u32 = 40;

impl RngSeed {
    pub fn new(seed: u64, client: u32, round: u32, purpose: Purpose) -> Self {
        assert!(client < MAX_CLIENT, "client id {client} exceeds stream packing");
        Self {
            seed,
            stream: StreamId {
                client,
                round,
                purpose,
            },
        }
    }

    fn packed_stream(&self) -> u64 {
        (u64::from(self.stream.client) << 40)
            | (u64::from(self.stream.round) << 8)
            | self.stream.purpose as u64
    }

    /// Generator positioned at the start of the stream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::from_seed(expand_key(self.seed));
        rng.set_stream(self.packed_stream());
        rng
    }

    /// Generator positioned at the sub-stream reserved for coordinate `j`.
    pub fn coordinate(&self, j: usize) -> ChaCha12Rng {
        let mut rng = self.rng();
        rng.set_word_pos((j as u128) << COORDINATE_SHIFT);
        rng
    }
}

/// SplitMix64 expansion of the base seed into a 256-bit key.
fn expand_key(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    key
}

/// Derives an independent base seed from a parent seed and a path of indices.
/// Used by sweeps to give every (point, repeat) its own run seed.
pub fn derive_seed(parent: u64, path: &[u64]) -> u64 {
    let mut rng = ChaCha12Rng::from_seed(expand_key(parent));
    let mut acc = rng.random::<u64>();
    for &p in path {
        let mut child = ChaCha12Rng::from_seed(expand_key(acc ^ p.rotate_left(17)));
        child.set_stream(p);
        acc = child.random::<u64>();
    }
    acc
}

/// First uniform draw in `[0, 1)` of the given stream.
pub fn draw_uniform(seed: &RngSeed) -> f64 {
    seed.rng().random::<f64>()
}
