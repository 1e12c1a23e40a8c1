//! Seeded, splittable random streams.
//!
//! Every stream is keyed by `(seed, label, a, b)` and seeded with the
//! SHA-256 of that key, so the stream for one work unit never depends on
//! which other units were generated first or on which thread.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha12Rng;

pub fn substream(seed: u64, label: &str, a: u64, b: u64) -> StreamRng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    h.update(a.to_le_bytes());
    h.update(b.to_le_bytes());
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    StreamRng::from_seed(key)
}
