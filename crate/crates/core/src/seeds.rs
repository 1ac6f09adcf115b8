//! Seed lineage and random substreams.
//!
//! Every stochastic stage gets its own seed derived from the master seed and
//! a stage label, so reseeding one stage never shifts the others. Work that is
//! split across items (pairs, rollouts, Monte Carlo chunks) draws from ChaCha
//! streams indexed by the item id, which keeps results independent of how the
//! items are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

/// Derive a stage seed from `(master, label)` via SHA-256.
pub fn derive(master: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(word)
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `id` of the generator seeded with `seed`.
pub fn substream(seed: u64, id: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
