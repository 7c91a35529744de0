//! Deterministic per-replica seeds.
//!
//! A seed is a pure function of `(master, x_index, replica, restart)`: the
//! three indices are packed into one 64-bit word (16 + 32 + 16 bits) and
//! combined with the scrambled master seed through the SplitMix64 finalizer,
//! which is a bijection on `u64`. For a fixed master the map is therefore
//! injective as long as `x_index < 2^16`, `replica < 2^32` and
//! `restart < 2^16`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 increment (the 64-bit golden ratio).
pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The generator every replica runs on.
pub type ReplicaRng = ChaCha8Rng;

/// SplitMix64 output permutation.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_replica_seed(master: u64, x_index: u32, replica: u64, restart: u32) -> u64 {
    let word = ((x_index as u64 & 0xFFFF) << 48) | ((replica & 0xFFFF_FFFF) << 16) | (restart as u64 & 0xFFFF);
    mix64(mix64(master ^ GOLDEN_GAMMA) ^ word)
}

pub fn replica_rng(seed: u64) -> ReplicaRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Identifies one replica of an experiment; restarts get their own seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ReplicaKey {
    pub master: u64,
    pub x_index: u32,
    pub replica: u64,
}

impl ReplicaKey {
    pub fn new(master: u64, x_index: u32, replica: u64) -> Self {
        Self {
            master,
            x_index,
            replica,
        }
    }

    pub fn seed(&self, restart: u32) -> u64 {
        derive_replica_seed(self.master, self.x_index, self.replica, restart)
    }
}
