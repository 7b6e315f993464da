//! Seeded, splittable random streams.
//!
//! Every simulated path owns one ChaCha8 stream selected by a 64-bit stream
//! id. The id packs a domain tag, a time-step index and a path index, so the
//! same path can be replayed bit-exactly from `(seed, id)` alone and the
//! training and evaluation draws never overlap.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dist::normal_inv_cdf;

const DOMAIN_SHIFT: u32 = 62;
const STEP_SHIFT: u32 = 40;

/// Largest path index representable in a stream id.
pub const MAX_PATHS: u64 = 1 << STEP_SHIFT;
/// Largest step index representable in a stream id.
pub const MAX_STEPS: u64 = 1 << (DOMAIN_SHIFT - STEP_SHIFT);

/// What a stream is used for. Each domain owns a disjoint slice of the id space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamDomain {
    Training = 0,
    Evaluation = 1,
    Auxiliary = 2,
}

/// Packs `(domain, step, path)` into a stream id.
pub fn stream_id(domain: StreamDomain, step: u64, path: u64) -> u64 {
    debug_assert!(step < MAX_STEPS && path < MAX_PATHS);
    ((domain as u64) << DOMAIN_SHIFT) | (step << STEP_SHIFT) | path
}

/// Source of uniform variates on the open interval (0, 1).
pub trait UniformSource {
    fn next_uniform(&mut self) -> f64;

    /// Standard normal variate by inversion of the uniform draw.
    fn next_normal(&mut self) -> f64 {
        normal_inv_cdf(self.next_uniform())
    }
}

/// Factory handing out independent streams for one seed.
#[derive(Clone, Debug)]
pub struct StreamFactory {
    base: ChaCha8Rng,
    seed: u64,
}

impl StreamFactory {
    pub fn new(seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
            seed,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, id: u64) -> Stream {
        let mut rng = self.base.clone();
        rng.set_stream(id);
        rng.set_word_pos(0);
        Stream { rng }
    }
}

/// One independent random stream.
#[derive(Clone, Debug)]
pub struct Stream {
    rng: ChaCha8Rng,
}

impl UniformSource for Stream {
    #[inline]
    fn next_uniform(&mut self) -> f64 {
        // 53 random bits centred in their cell: never 0, never 1.
        let bits = self.rng.next_u64() >> 11;
        (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

/// Degenerate source that always returns the same value. Handy in tests.
#[derive(Clone, Copy, Debug)]
pub struct ConstantSource(pub f64);

impl UniformSource for ConstantSource {
    fn next_uniform(&mut self) -> f64 {
        self.0
    }
}
