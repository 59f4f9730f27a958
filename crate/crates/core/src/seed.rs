//! Per-frame random streams derived from one global seed, so a frame's
//! augmentation does not depend on processing order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::cloud::FrameKey;

pub type FrameRng = ChaCha8Rng;

pub fn frame_seed(global: u64, frame: FrameKey) -> u64 {
    let mut h = Sha256::new();
    h.update(b"lidar-forge/frame");
    h.update(global.to_le_bytes());
    h.update(frame.sequence.to_le_bytes());
    h.update(frame.frame.to_le_bytes());
    u64::from_le_bytes(h.finalize()[..8].try_into().unwrap())
}

pub fn frame_rng(global: u64, frame: FrameKey) -> FrameRng {
    ChaCha8Rng::seed_from_u64(frame_seed(global, frame))
}
