//! Seeded random streams. Every consumer draws from its own ChaCha8 stream
//! so that adding a miner or a link leaves the other streams untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids below this value belong to miners; latency channels use the
/// range above it.
pub const CHANNEL_STREAM_BASE: u64 = 1 << 32;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn miner_rng(seed: u64, miner: usize) -> ChaCha8Rng {
    stream_rng(seed, miner as u64)
}

pub fn channel_rng(seed: u64, from: usize, to: usize) -> ChaCha8Rng {
    stream_rng(
        seed,
        CHANNEL_STREAM_BASE + ((from as u64) << 16) + to as u64,
    )
}
