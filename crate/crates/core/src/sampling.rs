//! Deterministic, chunked random sampling.
//!
//! Every sampled check draws from a ChaCha stream keyed by `(seed, chunk)`.
//! Chunks are independent, so a caller may evaluate them on separate threads
//! and merge the results in chunk order without changing the outcome.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 0x5EED_2024;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_CHUNK: usize = 1024;

/// Sampling parameters: how many draws, which seed, and the box the base
/// points are drawn from (applied to every coordinate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub samples: usize,
    pub seed: u64,
    pub lower: f64,
    pub upper: f64,
    pub chunk_size: usize,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            lower: -10.0,
            upper: 10.0,
            chunk_size: DEFAULT_CHUNK,
        }
    }
}

impl SamplePlan {
    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_box(mut self, lower: f64, upper: f64) -> Self {
        self.lower = lower;
        self.upper = upper;
        self
    }

    pub fn chunk_count(&self) -> usize {
        let size = self.chunk_size.max(1);
        self.samples.div_ceil(size)
    }

    /// Number of draws in chunk `chunk`.
    pub fn chunk_len(&self, chunk: usize) -> usize {
        let size = self.chunk_size.max(1);
        let start = chunk * size;
        self.samples.saturating_sub(start).min(size)
    }

    pub fn chunk_rng(&self, chunk: usize) -> ChaCha8Rng {
        stream_rng(self.seed, chunk as u64)
    }
}

/// A generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Evaluates independent chunks `0..count` and returns their results in
/// chunk order. Implementations may run chunks concurrently.
pub trait Executor: Sync {
    fn map_chunks<T: Send>(&self, count: usize, f: &(dyn Fn(usize) -> T + Sync)) -> Vec<T>;
}

/// Runs chunks one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_chunks<T: Send>(&self, count: usize, f: &(dyn Fn(usize) -> T + Sync)) -> Vec<T> {
        (0..count).map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn chunks_cover_all_samples() {
        for samples in [0, 1, 1023, 1024, 1025, 10_000] {
            let plan = SamplePlan::default().with_samples(samples);
            let total: usize = (0..plan.chunk_count()).map(|c| plan.chunk_len(c)).sum();
            assert_eq!(total, samples);
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream_rng(1, 0).gen();
        let b: u64 = stream_rng(1, 0).gen();
        let c: u64 = stream_rng(1, 1).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
