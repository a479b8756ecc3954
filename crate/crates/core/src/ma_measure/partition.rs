use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{wrap_scalar, Point, ScalarDensity};
use crate::math;

/// Uniform product partition of the fundamental domain into `bins^dim`
/// boxes. The bin edges sit at `offset - 1/2 + j/bins` along every axis, so an
/// offset moves the edges away from sites that would otherwise sit on them.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    dim: usize,
    bins: usize,
    offset: f64,
}

impl Partition {
    pub fn uniform(dim: usize, bins: usize) -> Result<Self> {
        Self::with_offset(dim, bins, 0.0)
    }

    pub fn with_offset(dim: usize, bins: usize, offset: f64) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidInput(alloc::format!("partition dimension {dim} not supported")));
        }
        if bins == 0 || !offset.is_finite() {
            return Err(Error::InvalidInput("partition needs at least one bin and a finite offset".into()));
        }
        Ok(Partition { dim, bins, offset: wrap_scalar(offset) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bins_per_axis(&self) -> usize {
        self.bins
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.bins.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn width(&self) -> f64 {
        1.0 / self.bins as f64
    }

    /// Position of `x` along one axis in bin units, in `[0, bins)`.
    fn axis_coord(&self, x: f64) -> f64 {
        let t = wrap_scalar(x - self.offset) + 0.5;
        t * self.bins as f64
    }

    fn axis_index(&self, x: f64) -> usize {
        (math::floor(self.axis_coord(x)) as usize).min(self.bins - 1)
    }

    /// Flat index of the bin containing `x` (last axis fastest).
    pub fn locate(&self, x: &Point) -> usize {
        (0..self.dim).fold(0, |acc, a| acc * self.bins + self.axis_index(x[a]))
    }

    /// Split of a coordinate between bins: a point within `tol` (in bin
    /// units) of an edge is shared equally between the two neighbours.
    pub(crate) fn axis_weights(&self, x: f64, tol: f64) -> [(usize, f64); 2] {
        let c = self.axis_coord(x);
        let j = (math::floor(c) as usize).min(self.bins - 1);
        let frac = c - j as f64;
        if frac < tol {
            [(j, 0.5), ((j + self.bins - 1) % self.bins, 0.5)]
        } else if frac > 1.0 - tol {
            [(j, 0.5), ((j + 1) % self.bins, 0.5)]
        } else {
            [(j, 1.0), (j, 0.0)]
        }
    }

    fn multi_index(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for a in (0..self.dim).rev() {
            out[a] = idx % self.bins;
            idx /= self.bins;
        }
        out
    }

    /// Lower corner of bin `idx`, unwrapped (may exceed 1/2 by the offset).
    pub fn lower(&self, idx: usize) -> Point {
        let m = self.multi_index(idx);
        let mut p = Point::zero(self.dim);
        for a in 0..self.dim {
            p[a] = self.offset - 0.5 + m[a] as f64 * self.width();
        }
        p
    }

    pub fn upper(&self, idx: usize) -> Point {
        self.lower(idx) + Point::splat(self.dim, self.width())
    }

    pub fn center(&self, idx: usize) -> Point {
        self.lower(idx) + Point::splat(self.dim, 0.5 * self.width())
    }

    pub fn volume(&self) -> f64 {
        math::powf(self.width(), self.dim as f64)
    }

    /// Bin-wise `∫ ρ`, exact for cosine densities.
    pub fn integrate_density(&self, rho: &ScalarDensity) -> Vec<f64> {
        (0..self.len()).map(|i| rho.box_integral(&self.lower(i), &self.upper(i))).collect()
    }

    /// Aggregate atoms into bins.
    pub fn bin_atoms(&self, sites: &[Point], masses: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.len()];
        for (x, m) in sites.iter().zip(masses) {
            out[self.locate(x)] += m;
        }
        out
    }
}

/// A measure estimated bin-by-bin, with a per-bin standard error (zero for
/// deterministic estimates).
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionMeasure {
    pub partition: Partition,
    pub masses: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl PartitionMeasure {
    pub fn exact(partition: Partition, masses: Vec<f64>) -> Self {
        let stderr = alloc::vec![0.0; masses.len()];
        PartitionMeasure { partition, masses, stderr }
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Reweight each bin by `ρ` at its center. The density is treated as
    /// constant across a bin, which is the resolution of the estimate anyway.
    pub fn weighted_by(&self, rho: &ScalarDensity) -> Self {
        let w: Vec<f64> = (0..self.partition.len()).map(|i| rho.eval(&self.partition.center(i))).collect();
        PartitionMeasure {
            partition: self.partition.clone(),
            masses: self.masses.iter().zip(&w).map(|(m, w)| m * w).collect(),
            stderr: self.stderr.iter().zip(&w).map(|(s, w)| s * w).collect(),
        }
    }

    /// Largest `|self - other|` over bins.
    pub fn max_abs_diff(&self, other: &[f64]) -> f64 {
        self.masses.iter().zip(other).map(|(a, b)| math::abs(a - b)).fold(0.0, f64::max)
    }
}

impl super::TotalMass for PartitionMeasure {
    fn total_mass(&self) -> f64 {
        self.total()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locate_and_bounds() {
        let p = Partition::with_offset(1, 4, 0.125).unwrap();
        assert_eq!(p.len(), 4);
        let i0 = p.locate(&Point::new(&[0.0]));
        let i1 = p.locate(&Point::new(&[0.5]));
        assert_ne!(i0, i1);
        for i in 0..4 {
            let c = p.center(i);
            assert_eq!(p.locate(&c), i);
            assert!((p.upper(i)[0] - p.lower(i)[0] - 0.25).abs() < 1e-15);
        }
        let q = Partition::uniform(2, 3).unwrap();
        assert_eq!(q.len(), 9);
        for i in 0..9 {
            assert_eq!(q.locate(&q.center(i)), i);
        }
    }

    #[test]
    fn density_integrals_sum_to_total() {
        let rho = ScalarDensity::cosine_1d(0.5).unwrap();
        let p = Partition::with_offset(1, 7, 0.03).unwrap();
        let s: f64 = p.integrate_density(&rho).iter().sum();
        assert!((s - 1.0).abs() < 1e-13);
    }

    #[test]
    fn edge_weights_split() {
        let p = Partition::uniform(1, 4).unwrap();
        let w = p.axis_weights(0.0, 1e-9);
        assert_eq!(w[0].1 + w[1].1, 1.0);
        assert_eq!(w[0].1, 0.5);
        let w = p.axis_weights(0.1, 1e-9);
        assert_eq!(w[0].1, 1.0);
    }
}
