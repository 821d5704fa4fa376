//! Reproducible random streams.
//!
//! A stream is identified by `(seed, index)`. Each stream is a ChaCha8 keystream
//! keyed by the seed and positioned on its own stream id, so the draws of
//! stream `k` never depend on how many other streams were consumed.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Default seed used when none is supplied through a config.
pub const DEFAULT_SEED: u64 = 0x5eed_2025;

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    index: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        // spread the seed so nearby seeds give unrelated keys
        let mixed = splitmix64(seed);
        key[8..16].copy_from_slice(&mixed.to_le_bytes());
        key[16..24].copy_from_slice(&splitmix64(mixed).to_le_bytes());
        key[24..32].copy_from_slice(&splitmix64(mixed ^ 0x9e37_79b9_7f4a_7c15).to_le_bytes());
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(index);
        RngStream { seed, index, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// A child stream derived from this stream's identity, for nested procedures
    /// that need their own independent randomness.
    pub fn child(&self, tag: u64) -> RngStream {
        RngStream::new(splitmix64(self.seed ^ splitmix64(tag.wrapping_add(1))), self.index)
    }

    /// Uniform draw in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform integer in [0, n).
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        self.inner.random_range(0..n)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        if p <= 0.0 {
            false
        } else if p >= 1.0 {
            true
        } else {
            self.uniform() < p
        }
    }
}

/// Runs `f` once per trial on stream `(seed, trial)` and returns the results in
/// trial order. With the `parallel` feature the trials run on the rayon pool;
/// the output does not depend on the number of workers.
pub fn run_trials<T, F>(seed: u64, trials: u64, f: F) -> crate::Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut RngStream) -> crate::Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(|i| f(i, &mut RngStream::new(seed, i))).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..trials).map(|i| f(i, &mut RngStream::new(seed, i))).collect()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
