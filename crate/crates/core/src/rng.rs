//! Seed derivation and named random streams.
//!
//! Every run owns a set of independent ChaCha8 streams, one per concern
//! (data transforms, weight init, dropout masks, MC passes, scheduling,
//! score draws). Streams are derived from the run seed with SplitMix64 so
//! that, e.g., changing the scheduling strategy never perturbs the data
//! transforms of a run with the same seed.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One step of the SplitMix64 generator, used purely as a seed mixer.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over a byte string; stable across platforms.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xCBF2_9CE4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

/// Derive the seed for a named substream of `seed`.
pub fn stream_seed(seed: u64, label: &str) -> u64 {
    splitmix64(seed ^ fnv1a64(label.as_bytes()))
}

/// Seeded generator for a named substream.
pub fn stream_rng(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, label))
}

/// Derive `count` per-run seeds from a master seed (SplitMix64 sequence).
pub fn derive_run_seeds(master: u64, count: usize) -> Vec<u64> {
    let mut state = master;
    (0..count)
        .map(|_| {
            state = splitmix64(state);
            state
        })
        .collect()
}

/// The named random streams of a single training run.
pub struct RunStreams {
    /// Dataset transforms (subsampling, corruption, splitting).
    pub data: ChaCha8Rng,
    /// Weight initialisation.
    pub init: ChaCha8Rng,
    /// Dropout masks during training steps.
    pub dropout: ChaCha8Rng,
    /// Stochastic forward passes for uncertainty estimation.
    pub mc: ChaCha8Rng,
    /// Permutation and subset draws.
    pub schedule: ChaCha8Rng,
    /// Random score vectors (random-ordering control).
    pub scores: ChaCha8Rng,
    /// Prior bootstrap training (shuffling and dropout of the throwaway model).
    pub bootstrap: ChaCha8Rng,
}

impl RunStreams {
    pub fn new(run_seed: u64) -> Self {
        RunStreams {
            data: stream_rng(run_seed, "data"),
            init: stream_rng(run_seed, "init"),
            dropout: stream_rng(run_seed, "dropout"),
            mc: stream_rng(run_seed, "mc"),
            schedule: stream_rng(run_seed, "schedule"),
            scores: stream_rng(run_seed, "scores"),
            bootstrap: stream_rng(run_seed, "bootstrap"),
        }
    }
}
