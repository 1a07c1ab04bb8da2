//! Seeded random number helpers.
//!
//! All randomness in the crate flows through [`SeededRng`], a thin wrapper
//! around ChaCha8 with the sampling algorithms written out explicitly so that
//! a (seed, stream) pair maps to the same values forever, independent of
//! upstream crate versions.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Named sub-streams so unrelated consumers of one experiment seed never
/// share draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    SubsetTrain,
    SubsetTest,
    Partition,
    Centers,
    Probes,
    Init,
    Pixels,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::SubsetTrain => 1,
            Stream::SubsetTest => 2,
            Stream::Partition => 3,
            Stream::Centers => 4,
            Stream::Probes => 5,
            Stream::Init => 6,
            Stream::Pixels => 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64, stream: Stream) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream.id());
        SeededRng { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw from `[0, 1)` using the top 53 bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw from `[-scale, scale)`.
    pub fn symmetric(&mut self, scale: f64) -> f64 {
        (2.0 * self.uniform() - 1.0) * scale
    }

    /// Index in `0..bound`. The modulo bias is irrelevant at the sizes used
    /// here (bound is at most a dataset length, far below 2^64).
    pub fn index(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        (self.next_u64() % bound as u64) as usize
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform().max(f64::MIN_POSITIVE);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }

    /// Uniform point in the closed ball of the given radius around the
    /// origin: a normal direction scaled by radius * u^(1/dim).
    pub fn in_ball(&mut self, dim: usize, radius: f64) -> Vec<f64> {
        let mut point: Vec<f64> = (0..dim).map(|_| self.normal()).collect();
        let norm = point.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return vec![0.0; dim];
        }
        let r = radius * self.uniform().powf(1.0 / dim as f64);
        for v in &mut point {
            *v *= r / norm;
        }
        point
    }
}
