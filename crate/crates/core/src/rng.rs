//! Seed/stream-addressed random generators.
//!
//! Every consumer of randomness asks for a generator by
//! `(seed, stream, index)`. The ChaCha key holds the seed and the index
//! (bootstrap replicate or Monte-Carlo replication); the ChaCha stream id
//! holds the [`Stream`] tag. Draws therefore depend only on their address,
//! never on how many draws other consumers made or in which order threads
//! ran.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// The generator handed out by [`stream_rng`].
pub type StreamRng = ChaCha20Rng;

/// Independent named substreams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stream {
    BootstrapResample = 1,
    RegressorError = 2,
    InstrumentError = 3,
    StructuralError = 4,
    ResponseError = 5,
    TrueEmissions = 6,
    Enso = 7,
    Vai = 8,
}

pub fn stream_rng(seed: u64, stream: Stream, index: u64) -> StreamRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(stream as u64);
    rng
}
