use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::{Partition, PartitionMeasure};
use crate::error::{Error, Result};
use crate::gconvex::PeriodicFunction;
use crate::geometry::{lattice_shifts, wrap, Point, MAX_DIM};
use crate::math;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeOracleConfig {
    pub samples: usize,
    pub seed: u64,
    /// Resolution of the search grid.
    pub grid: usize,
    pub batch_size: usize,
}

impl SlopeOracleConfig {
    pub fn new(samples: usize, seed: u64, dim: usize) -> Self {
        SlopeOracleConfig { samples, seed, grid: if dim == 1 { 512 } else { 128 }, batch_size: 4096 }
    }

    pub fn batches(&self) -> usize {
        self.samples.div_ceil(self.batch_size)
    }

    /// Number of samples in batch `b`.
    pub fn batch_len(&self, b: usize) -> usize {
        let start = b * self.batch_size;
        self.batch_size.min(self.samples.saturating_sub(start))
    }
}

/// Monte Carlo estimate of `M[u]` on a partition: a uniform slope `p` in the
/// unit cube is attributed to the bin of the minimizer of
/// `y ↦ u(y) + |y - p|²/2` over the cover, since exactly then `p ∈ ∂v(y)`.
///
/// Batches use independent ChaCha8 streams keyed by `(seed, batch)`, so the
/// result is the same however batches are scheduled.
pub struct SlopeSampler<'a, F: ?Sized> {
    u: &'a F,
    partition: Partition,
    m: usize,
    dim: usize,
    table: Vec<f64>,
    seed: u64,
    near: Vec<Point>,
    far: Vec<Point>,
}

impl<'a, F: PeriodicFunction + ?Sized> SlopeSampler<'a, F> {
    pub fn new(u: &'a F, partition: &Partition, grid: usize, seed: u64) -> Result<Self> {
        let dim = u.dim();
        if dim != partition.dim() {
            return Err(Error::DimensionMismatch { expected: partition.dim(), found: dim });
        }
        if grid < 8 {
            return Err(Error::InvalidInput("slope oracle grid must have at least 8 nodes per axis".into()));
        }
        let table = crate::gconvex::GridFunction::sample(u, grid)?.into_values();
        let near: Vec<Point> = lattice_shifts(dim, 1).into_iter().filter(|k| k.norm_inf() > 0.0).collect();
        let far: Vec<Point> = lattice_shifts(dim, 2).into_iter().filter(|k| k.norm_inf() > 1.0).collect();
        Ok(SlopeSampler { u, partition: partition.clone(), m: grid, dim, table, seed, near, far })
    }

    fn grid_objective(&self, j: &[i64; MAX_DIM], p: &Point) -> f64 {
        let m = self.m as i64;
        let mut flat = 0usize;
        let mut q = 0.0;
        for a in 0..self.dim {
            flat = flat * self.m + j[a].rem_euclid(m) as usize;
            let d = -0.5 + j[a] as f64 / self.m as f64 - p[a];
            q += d * d;
        }
        self.table[flat] + 0.5 * q
    }

    /// Minimizer of `u(y) + |y - p|²/2`, unwrapped.
    pub fn argmin(&self, p: &Point) -> Point {
        let mut j = [0i64; MAX_DIM];
        for a in 0..self.dim {
            j[a] = math::round((p[a] + 0.5) * self.m as f64) as i64;
        }
        let mut best = self.grid_objective(&j, p);
        loop {
            let mut moved = false;
            for ring in [&self.near, &self.far] {
                let mut cand = j;
                let mut cand_val = best;
                for k in ring.iter() {
                    let mut t = j;
                    for a in 0..self.dim {
                        t[a] += k[a] as i64;
                    }
                    let val = self.grid_objective(&t, p);
                    if val < cand_val {
                        cand_val = val;
                        cand = t;
                    }
                }
                if cand_val < best {
                    best = cand_val;
                    j = cand;
                    moved = true;
                    break;
                }
            }
            if !moved {
                break;
            }
        }
        // Polish between grid nodes with the function itself.
        let h = 1.0 / self.m as f64;
        let mut x = Point::zero(self.dim);
        for a in 0..self.dim {
            x[a] = -0.5 + j[a] as f64 * h;
        }
        let objective = |y: &Point| self.u.eval(y) + 0.5 * (*y - *p).norm2();
        let mut best_x = x;
        let mut best_val = objective(&x);
        for k in &self.near {
            let y = x + *k * (0.5 * h);
            let val = objective(&y);
            if val < best_val {
                best_val = val;
                best_x = y;
            }
        }
        best_x
    }

    fn uniform(rng: &mut ChaCha8Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) - 0.5
    }

    /// Bin counts for `n` samples of batch `b`.
    pub fn run_batch(&self, b: usize, n: usize) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(b as u64);
        let mut counts = alloc::vec![0u64; self.partition.len()];
        for _ in 0..n {
            let mut p = Point::zero(self.dim);
            for a in 0..self.dim {
                p[a] = Self::uniform(&mut rng);
            }
            let x = self.argmin(&p);
            counts[self.partition.locate(&wrap(&x))] += 1;
        }
        counts
    }

    /// Turn merged counts into masses with binomial standard errors.
    pub fn finish(&self, counts: &[u64]) -> PartitionMeasure {
        let n: u64 = counts.iter().sum();
        let nf = n.max(1) as f64;
        let masses: Vec<f64> = counts.iter().map(|c| *c as f64 / nf).collect();
        let stderr = masses.iter().map(|q| math::sqrt(q * (1.0 - q) / nf)).collect();
        PartitionMeasure { partition: self.partition.clone(), masses, stderr }
    }
}

/// Serial driver for [`SlopeSampler`].
pub fn ma_oracle_slopes<F: PeriodicFunction + ?Sized>(
    u: &F,
    partition: &Partition,
    cfg: &SlopeOracleConfig,
) -> Result<PartitionMeasure> {
    if cfg.samples == 0 || cfg.batch_size == 0 {
        return Err(Error::InvalidInput("slope oracle needs samples and a positive batch size".into()));
    }
    let sampler = SlopeSampler::new(u, partition, cfg.grid, cfg.seed)?;
    let mut counts = alloc::vec![0u64; partition.len()];
    for b in 0..cfg.batches() {
        for (c, d) in counts.iter_mut().zip(sampler.run_batch(b, cfg.batch_len(b))) {
            *c += d;
        }
    }
    Ok(sampler.finish(&counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::EnvelopeFunction;
    use alloc::vec;

    #[test]
    fn single_site_puts_everything_at_the_site() {
        let f = EnvelopeFunction::with_default_truncation(vec![Point::new(&[0.0])], vec![0.0]).unwrap();
        let hull = f.hull().unwrap();
        let part = Partition::with_offset(1, 4, 0.125).unwrap();
        let cfg = SlopeOracleConfig { samples: 20_000, seed: 7, grid: 256, batch_size: 1000 };
        let est = ma_oracle_slopes(&hull, &part, &cfg).unwrap();
        let at = part.locate(&Point::new(&[0.0]));
        assert!((est.masses[at] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_sites_split_evenly() {
        let f = EnvelopeFunction::with_default_truncation(
            vec![Point::new(&[0.0]), Point::new(&[0.5])],
            vec![0.0, 0.0],
        )
        .unwrap();
        let hull = f.hull().unwrap();
        let part = Partition::with_offset(1, 4, 0.125).unwrap();
        let cfg = SlopeOracleConfig { samples: 40_000, seed: 3, grid: 256, batch_size: 4096 };
        let est = ma_oracle_slopes(&hull, &part, &cfg).unwrap();
        for x in [0.0, 0.5] {
            let b = part.locate(&Point::new(&[x]));
            assert!((est.masses[b] - 0.5).abs() <= (3.0 * est.stderr[b]).max(0.02));
        }
    }

    #[test]
    fn batching_is_deterministic() {
        let f = EnvelopeFunction::with_default_truncation(
            vec![Point::new(&[0.1]), Point::new(&[-0.3])],
            vec![0.0, 0.05],
        )
        .unwrap();
        let hull = f.hull().unwrap();
        let part = Partition::uniform(1, 8).unwrap();
        let a = SlopeOracleConfig { samples: 5000, seed: 11, grid: 128, batch_size: 1000 };
        let x = ma_oracle_slopes(&hull, &part, &a).unwrap();
        let y = ma_oracle_slopes(&hull, &part, &a).unwrap();
        assert_eq!(x, y);
    }
}
