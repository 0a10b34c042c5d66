//! Labelled random substreams derived from one master seed.
//!
//! Each `(seed, label, index)` triple is hashed into a 256-bit ChaCha key, so
//! streams never depend on the order in which other streams were consumed.
//! This keeps Monte Carlo sweeps bit-reproducible under any worker count.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone)]
pub struct RngStream(ChaCha8Rng);

/// Returns the substream identified by `(seed, label, index)`.
pub fn derive_stream(seed: u64, label: &str, index: u64) -> RngStream {
    let mut hasher = Sha256::new();
    hasher.update(b"async-ura/stream/v1");
    hasher.update(seed.to_le_bytes());
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    RngStream(ChaCha8Rng::from_seed(key))
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}
