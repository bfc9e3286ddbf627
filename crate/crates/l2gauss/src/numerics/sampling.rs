//! Seeded, chunked Monte Carlo.
//!
//! Work is split into fixed-size chunks. Chunk `k` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `k`, so the draws of a chunk
//! depend only on `(seed, k)`. Per-chunk results are collected in chunk order
//! and reduced sequentially, which makes every estimate bitwise independent
//! of the rayon worker count.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleStream {
    pub seed: u64,
    pub chunk_size: usize,
    pub dims: usize,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SampleStream {
    pub fn new(seed: u64, dims: usize) -> Self {
        SampleStream { seed, chunk_size: DEFAULT_CHUNK, dims }
    }

    pub fn with_chunk_size(self, chunk_size: usize) -> Self {
        SampleStream { chunk_size: chunk_size.max(1), ..self }
    }

    pub fn with_dims(self, dims: usize) -> Self {
        SampleStream { dims, ..self }
    }

    /// An independent stream for a different purpose, keyed by `tag`.
    pub fn fork(&self, tag: u64) -> Self {
        SampleStream { seed: splitmix64(self.seed ^ splitmix64(tag)), ..*self }
    }

    pub fn chunk_rng(&self, chunk: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(chunk);
        rng
    }

    pub fn num_chunks(&self, n: usize) -> usize {
        n.div_ceil(self.chunk_size)
    }

    fn chunk_len(&self, n: usize, k: usize) -> usize {
        (n - k * self.chunk_size).min(self.chunk_size)
    }

    /// Runs `f(rng, count)` for every chunk covering `n` samples; results are
    /// returned in chunk order.
    pub fn map_chunks<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
    {
        (0..self.num_chunks(n))
            .into_par_iter()
            .map(|k| {
                let mut rng = self.chunk_rng(k as u64);
                f(&mut rng, self.chunk_len(n, k))
            })
            .collect()
    }

    /// Sample mean and standard error of `f` over `n` draws produced by
    /// `draw` into a scratch buffer of length `dims`.
    pub fn estimate<D, F>(&self, n: usize, draw: D, f: F) -> Estimate
    where
        D: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let parts = self.map_chunks(n, |rng, count| {
            let mut buf = vec![0.0; self.dims];
            let mut acc = Welford::default();
            for _ in 0..count {
                draw(rng, &mut buf);
                acc.push(f(&buf));
            }
            acc
        });
        Welford::merge_all(&parts).estimate()
    }
}

/// Fills `out[i]` with independent `N(0, sigma_i²)` draws.
pub fn fill_gaussian<R: Rng + ?Sized>(rng: &mut R, sigmas: &[f64], out: &mut [f64]) {
    for (o, &s) in out.iter_mut().zip(sigmas) {
        let z: f64 = rng.sample(StandardNormal);
        *o = s * z;
    }
}

/// Running mean and centred second moment, mergeable in a fixed order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Welford {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, o: &Welford) -> Welford {
        if self.n == 0 {
            return *o;
        }
        if o.n == 0 {
            return *self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        let mean = self.mean + d * o.n as f64 / n as f64;
        let m2 = self.m2 + o.m2 + d * d * (self.n as f64 * o.n as f64) / n as f64;
        Welford { n, mean, m2 }
    }

    pub fn merge_all(parts: &[Welford]) -> Welford {
        parts.iter().fold(Welford::default(), |acc, p| acc.merge(p))
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn estimate(&self) -> Estimate {
        let se = if self.n == 0 { 0.0 } else { (self.variance() / self.n as f64).sqrt() };
        Estimate { mean: self.mean, std_error: se, n: self.n as usize }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl Estimate {
    pub fn exact(v: f64) -> Self {
        Estimate { mean: v, std_error: 0.0, n: 0 }
    }

    /// Mean and standard error of a list of independent batch values.
    pub fn from_batches(batches: &[f64]) -> Self {
        let mut w = Welford::default();
        for &b in batches {
            w.push(b);
        }
        w.estimate()
    }

    /// Whether `|mean − target| ≤ k·std_error` (with a tiny absolute floor for
    /// exact estimates).
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error + 1e-14 * target.abs().max(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(stream: &SampleStream) -> Estimate {
        stream.estimate(
            50_000,
            |rng, buf| fill_gaussian(rng, &[1.0, 0.5], buf),
            |x| x[0] * x[0] + x[1],
        )
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let s = SampleStream::new(11, 2).with_chunk_size(1000);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run(&s));
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| run(&s));
        assert_eq!(one.mean.to_bits(), four.mean.to_bits());
        assert_eq!(one.std_error.to_bits(), four.std_error.to_bits());
        assert!(one.within(1.0, 4.0));
    }

    #[test]
    fn forks_differ() {
        let s = SampleStream::new(1, 2);
        assert_ne!(s.fork(1).seed, s.fork(2).seed);
        assert_ne!(run(&s.fork(1)).mean, run(&s.fork(2)).mean);
    }

    #[test]
    fn welford_merge_matches_direct() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut all = Welford::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = Welford::default();
        let mut b = Welford::default();
        xs[..37].iter().for_each(|&x| a.push(x));
        xs[37..].iter().for_each(|&x| b.push(x));
        let m = a.merge(&b);
        assert!((m.mean - all.mean).abs() < 1e-14);
        assert!((m.m2 - all.m2).abs() < 1e-12);
    }

    #[test]
    fn constant_has_zero_error() {
        let e = SampleStream::new(5, 1).estimate(1000, |rng, b| fill_gaussian(rng, &[1.0], b), |_| 1.0);
        assert_eq!((e.mean, e.std_error), (1.0, 0.0));
    }
}
