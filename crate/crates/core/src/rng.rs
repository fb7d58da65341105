//! Seeded random streams.
//!
//! Every consumer of randomness draws from its own [`RngStream`], derived from
//! the run seed and a [`StreamId`]. Adding draws to one stream never shifts the
//! sequence observed by another, so e.g. the evolutionary trajectory does not
//! depend on whether the neural network was initialised.

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

/// Named sub-streams of a run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamId {
    Evolution,
    NeuralInit,
    Shuffle,
    Dropout,
    Instance,
    Custom(u64),
}

impl StreamId {
    fn tag(self) -> u64 {
        match self {
            StreamId::Evolution => 0x4541_0001,
            StreamId::NeuralInit => 0x4e49_0002,
            StreamId::Shuffle => 0x5348_0003,
            StreamId::Dropout => 0x4452_0004,
            StreamId::Instance => 0x494e_0005,
            StreamId::Custom(v) => 0x4355_0000_0000_0000 ^ v,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A single-owner xoshiro256++ generator.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: Xoshiro256PlusPlus,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { seed, inner: Xoshiro256PlusPlus::seed_from_u64(seed) }
    }

    /// Derives an independent stream for `id` from a root seed.
    pub fn derive(root_seed: u64, id: StreamId) -> Self {
        RngStream::new(splitmix64(root_seed ^ splitmix64(id.tag())))
    }

    /// Derives a child stream of this stream's seed. Does not advance `self`.
    pub fn split(&self, id: StreamId) -> Self {
        RngStream::derive(self.seed, id)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw from [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform draw from [lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform index in `0..n`. Panics when `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.inner);
    }
}
