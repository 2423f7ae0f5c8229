//! Deterministic labeled random streams.
//!
//! Every stream is a ChaCha20 generator keyed by
//! `SHA-256("ringbench/stream/v1" || seed as 8 little-endian bytes || label)`.
//! The derivation is part of the output format: changing it changes every
//! generated graph, so it is versioned in the key prefix.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub type Stream = ChaCha20Rng;

const KEY_PREFIX: &[u8] = b"ringbench/stream/v1";

/// Opens the stream named `label` under the root `seed`.
pub fn make_rng(seed: u64, label: &str) -> Stream {
    let mut hasher = Sha256::new();
    hasher.update(KEY_PREFIX);
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha20Rng::from_seed(key)
}
