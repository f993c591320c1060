//! Seed derivation and labeled random streams.
//!
//! Every random draw in an episode comes from a `ChaCha8Rng` whose seed is
//! derived from a master seed and a label, so that streams never alias and
//! replays are exact.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Stream = ChaCha8Rng;

/// Derives a 64-bit seed from a parent seed and a textual label.
pub fn derive_seed(parent: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(parent.to_le_bytes());
    h.update(label.as_bytes());
    let out = h.finalize();
    let mut b = [0u8; 8];
    b.copy_from_slice(&out[..8]);
    u64::from_le_bytes(b)
}

/// Derives a seed from a parent seed and a sequence of integer coordinates.
pub fn derive_seed_indexed(parent: u64, label: &str, idx: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update(parent.to_le_bytes());
    h.update(label.as_bytes());
    for i in idx {
        h.update(i.to_le_bytes());
    }
    let out = h.finalize();
    let mut b = [0u8; 8];
    b.copy_from_slice(&out[..8]);
    u64::from_le_bytes(b)
}

pub fn stream(parent: u64, label: &str) -> Stream {
    ChaCha8Rng::seed_from_u64(derive_seed(parent, label))
}

pub fn stream_from(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Labels of the per-episode sub-streams.
pub mod labels {
    pub const SPREAD: &str = "fire-spread";
    pub const WIND: &str = "wind";
    pub const PHYSICS: &str = "physics";
    pub const POLICY: &str = "policy";
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn labels_give_distinct_streams() {
        let mut a = stream(7, labels::SPREAD);
        let mut b = stream(7, labels::WIND);
        let xa: u64 = a.random();
        let xb: u64 = b.random();
        assert_ne!(xa, xb);
    }

    #[test]
    fn derivation_is_stable() {
        assert_eq!(derive_seed(1, "x"), derive_seed(1, "x"));
        assert_ne!(derive_seed_indexed(1, "s", &[0, 1]), derive_seed_indexed(1, "s", &[1, 0]));
    }
}
