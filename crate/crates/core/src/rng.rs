//! Seed derivation. Every random stream is keyed by the global seed plus labels such as an
//! instance id, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// A ChaCha8 stream seeded from `sha256(seed || label_1 || 0 || label_2 || 0 ...)`.
pub fn derive_rng(seed: u64, labels: &[&str]) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for l in labels {
        h.update(l.as_bytes());
        h.update([0u8]);
    }
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

/// Lower-case hex sha256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
