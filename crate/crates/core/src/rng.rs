//! Seeded random streams.
//!
//! All randomness comes from ChaCha8, a counter-based generator. A run seed is
//! split into independent streams by stream id, so per-particle noise can be
//! drawn in parallel without changing which numbers each particle sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Stream ids below this value are reserved for per-particle noise.
const PURPOSE_BASE: u64 = 1 << 48;

/// Named purposes for the non-particle streams derived from a seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Uniform = 1,
    Lhs = 2,
    Initializer = 3,
    Scramble = 4,
}

/// A generator for `seed` restricted to the stream reserved for `purpose`.
pub fn stream(seed: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(PURPOSE_BASE + purpose as u64);
    rng
}

/// One independent ChaCha8 stream per particle.
#[derive(Debug, Clone)]
pub struct ParticleStreams {
    streams: Vec<ChaCha8Rng>,
}

impl ParticleStreams {
    pub fn new(seed: u64, n: usize) -> Self {
        let base = ChaCha8Rng::seed_from_u64(seed);
        let streams = (0..n as u64)
            .map(|i| {
                let mut r = base.clone();
                r.set_stream(i);
                r
            })
            .collect();
        Self { streams }
    }

    pub fn len(&self) -> usize {
        self.streams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.streams.is_empty()
    }

    pub fn streams_mut(&mut self) -> &mut [ChaCha8Rng] {
        &mut self.streams
    }
}

#[inline]
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}
