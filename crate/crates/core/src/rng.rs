//! Seed management.
//!
//! Every random decision in a run is drawn from a named sub-stream of a single
//! master seed, so that e.g. changing the number of walk trials does not
//! perturb the edge split.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

/// Derive a 64-bit seed for the sub-stream `name` of `master`.
pub fn derive_seed(master: u64, name: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(name.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Generator for the sub-stream `name` of `master`.
pub fn stream(master: u64, name: &str) -> Rng {
    Rng::seed_from_u64(derive_seed(master, name))
}
