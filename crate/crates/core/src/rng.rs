//! Seeded uniform streams.
//!
//! Every run owns one [`RngStream`]. Independent runs derive their streams
//! from `(master_seed, run_index)` by selecting a distinct ChaCha8 stream
//! under the same key, so streams never overlap and the output does not
//! depend on how runs are spread over threads.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const INV_2_52: f64 = 1.0 / (1u64 << 52) as f64;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
    draws: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::split(seed, 0)
    }

    /// Stream number `run_index` under the key derived from `master_seed`.
    pub fn split(master_seed: u64, run_index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(run_index);
        Self {
            seed: master_seed,
            stream: run_index,
            inner,
            draws: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of uniforms drawn so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// Uniform on the open interval (0, 1).
    ///
    /// The top 52 bits are centred in their cell, `(x + 0.5) / 2^52`, so both
    /// endpoints are excluded and `-ln(u)` is always finite and positive.
    pub fn uniform(&mut self) -> f64 {
        self.draws += 1;
        let x = self.inner.next_u64() >> 12;
        (x as f64 + 0.5) * INV_2_52
    }

    /// Exp(1) variate as `-ln(U)`.
    pub fn exp1(&mut self) -> f64 {
        -self.uniform().ln()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.inner.next_u64()
    }
}
