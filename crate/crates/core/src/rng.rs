//! Reproducible random streams.
//!
//! A stream is identified by `(seed, domain, index)`. The ChaCha key is built
//! from `seed` and `domain`, and `index` selects the ChaCha stream, so every
//! replica (or draw chunk) has an independent, individually replayable source
//! regardless of how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

/// Source of standard normal variates.
pub trait NormalSource {
    fn next_normal(&mut self) -> f64;
}

#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha20Rng,
}

impl Stream {
    pub fn new(seed: u64, domain: u64, index: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&domain.to_le_bytes());
        let mut rng = ChaCha20Rng::from_seed(key);
        rng.set_stream(index);
        Self { rng }
    }

    pub fn rng(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }
}

impl NormalSource for Stream {
    #[inline]
    fn next_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}

/// Noise source that always returns zero; freezes a path for tests.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNoise;

impl NormalSource for ZeroNoise {
    fn next_normal(&mut self) -> f64 {
        0.0
    }
}

/// Stable 64-bit label hash (FNV-1a) for deriving stream domains from names.
pub fn domain(label: &str) -> u64 {
    label
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}
