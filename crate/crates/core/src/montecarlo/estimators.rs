use rayon::prelude::*;
use serde::Serialize;

use super::rng::CHUNK;
use crate::subset::SubsetMask;

/// Streaming mean and variance (Welford), mergeable in a fixed order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise merge.
    pub fn merge(&mut self, other: &RunningStats) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.n as f64 * w;
        self.n = n;
    }

    pub fn count(&self) -> usize {
        self.n as usize
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        (self.variance() / self.n as f64).sqrt()
    }

    pub fn estimate(&self, seed: u64, estimand: impl Into<String>) -> McEstimate {
        McEstimate {
            mean: self.mean,
            stderr: self.stderr(),
            n: self.count(),
            seed,
            estimand: estimand.into(),
        }
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
    pub estimand: String,
}

impl McEstimate {
    /// `|mean − target| ≤ k·stderr` (with a floor for zero-variance cases).
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr + 1e-12 * target.abs().max(1.0)
    }
}

/// An `n × d` matrix of draws, row-major. Used both for generator draws
/// and for draws of max-stable vectors themselves.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSample {
    pub family: &'static str,
    pub dim: usize,
    pub n: usize,
    pub seed: u64,
    pub(crate) data: Vec<f64>,
}

impl GeneratorSample {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Means of `k` per-row functionals in a single pass. Chunks are
    /// reduced in parallel and merged in chunk order, so results do not
    /// depend on the thread count.
    pub fn mean_of_many<F>(&self, k: usize, f: F) -> Vec<RunningStats>
    where
        F: Fn(&[f64], &mut [f64]) + Sync,
    {
        let d = self.dim;
        let partials: Vec<Vec<RunningStats>> = self
            .data
            .par_chunks(CHUNK * d)
            .map(|chunk| {
                let mut stats = vec![RunningStats::default(); k];
                let mut buf = vec![0.0; k];
                for row in chunk.chunks_exact(d) {
                    f(row, &mut buf);
                    for (s, &v) in stats.iter_mut().zip(&buf) {
                        s.push(v);
                    }
                }
                stats
            })
            .collect();
        merge_partials(k, partials)
    }

    /// Like [`GeneratorSample::mean_of_many`] over aligned row pairs of two
    /// samples (common random numbers).
    pub fn paired_mean_of_many<F>(&self, other: &GeneratorSample, k: usize, f: F) -> Vec<RunningStats>
    where
        F: Fn(&[f64], &[f64], &mut [f64]) + Sync,
    {
        assert_eq!(self.n, other.n, "paired samples need equal sizes");
        let (d1, d2) = (self.dim, other.dim);
        let partials: Vec<Vec<RunningStats>> = self
            .data
            .par_chunks(CHUNK * d1)
            .zip(other.data.par_chunks(CHUNK * d2))
            .map(|(c1, c2)| {
                let mut stats = vec![RunningStats::default(); k];
                let mut buf = vec![0.0; k];
                for (r1, r2) in c1.chunks_exact(d1).zip(c2.chunks_exact(d2)) {
                    f(r1, r2, &mut buf);
                    for (s, &v) in stats.iter_mut().zip(&buf) {
                        s.push(v);
                    }
                }
                stats
            })
            .collect();
        merge_partials(k, partials)
    }

    pub fn mean_of<F>(&self, estimand: &str, f: F) -> McEstimate
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        self.mean_of_many(1, |row, out| out[0] = f(row))[0].estimate(self.seed, estimand)
    }

    pub fn column_means(&self) -> Vec<McEstimate> {
        self.mean_of_many(self.dim, |row, out| out.copy_from_slice(row))
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.estimate(self.seed, format!("E Z{}", i + 1)))
            .collect()
    }

    /// `E max_i x_i Z_i`.
    pub fn ell_estimate(&self, x: &[f64]) -> McEstimate {
        self.mean_of("E max x_i Z_i", |row| max_weighted(row, x))
    }

    /// `E min_{i∈A} a_i Z_i`.
    pub fn min_estimate(&self, a: &[f64], set: SubsetMask) -> McEstimate {
        let idx: Vec<usize> = set.indices().collect();
        self.mean_of("E min_A a_i Z_i", |row| min_weighted(row, a, &idx))
    }
}

fn merge_partials(k: usize, partials: Vec<Vec<RunningStats>>) -> Vec<RunningStats> {
    let mut total = vec![RunningStats::default(); k];
    for p in &partials {
        for (t, s) in total.iter_mut().zip(p) {
            t.merge(s);
        }
    }
    total
}

#[inline]
pub(crate) fn max_weighted(row: &[f64], x: &[f64]) -> f64 {
    row.iter().zip(x).fold(0.0, |m, (z, w)| m.max(z * w))
}

#[inline]
pub(crate) fn min_weighted(row: &[f64], a: &[f64], idx: &[usize]) -> f64 {
    idx.iter().fold(f64::INFINITY, |m, &i| m.min(a[i] * row[i]))
}
