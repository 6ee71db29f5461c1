//! Counter-based random streams.
//!
//! Every random quantity in a run is drawn from a ChaCha stream keyed by the
//! run seed plus a small tuple of counters, so results never depend on the
//! order in which workers pick up subjects.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Stream = ChaCha8Rng;

/// Purposes for which streams are derived; keeps keys from colliding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Group = 1,
    Subject = 2,
    Init = 3,
    Generate = 4,
    Predict = 5,
    Misc = 6,
}

pub fn stream(seed: u64, purpose: Purpose, a: u64, b: u64) -> Stream {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(purpose as u64).to_le_bytes());
    key[16..24].copy_from_slice(&a.to_le_bytes());
    key[24..].copy_from_slice(&b.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Stable 64-bit key for a subject identifier.
pub fn subject_key(id: &str) -> u64 {
    let digest = Sha256::digest(id.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}
