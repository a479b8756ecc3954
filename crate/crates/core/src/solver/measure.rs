use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{wrap, Point, ScalarDensity};
use crate::math;

/// `μ = Σ c_i δ_{a_i}` with distinct wrapped sites and positive weights.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicMeasure {
    sites: Vec<Point>,
    weights: Vec<f64>,
}

impl AtomicMeasure {
    /// A probability measure; weights must sum to 1 within 1e-12.
    pub fn new(sites: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        let m = Self::positive(sites, weights)?;
        let total = m.total();
        if math::abs(total - 1.0) > 1e-12 {
            return Err(Error::InvalidInput(alloc::format!("atomic weights sum to {total}, expected 1")));
        }
        Ok(m)
    }

    /// A finite positive measure (no normalization).
    pub fn positive(sites: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if sites.is_empty() || sites.len() != weights.len() {
            return Err(Error::InvalidInput("atomic measure needs as many weights as sites, at least one".into()));
        }
        let dim = sites[0].dim();
        if let Some(p) = sites.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidInput("atomic weights must be positive and finite".into()));
        }
        let sites: Vec<Point> = sites.iter().map(wrap).collect();
        Ok(AtomicMeasure { sites, weights })
    }

    /// Normalize positive weights to a probability measure.
    pub fn normalized(sites: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroMass);
        }
        Self::positive(sites, weights.iter().map(|w| w / total).collect())
    }

    pub fn dirac(site: Point) -> Self {
        AtomicMeasure { sites: alloc::vec![wrap(&site)], weights: alloc::vec![1.0] }
    }

    pub fn dim(&self) -> usize {
        self.sites[0].dim()
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Multiply atom `i` by `factors[i]`.
    pub fn reweighted(&self, factors: &[f64]) -> Result<Self> {
        Self::positive(self.sites.clone(), self.weights.iter().zip(factors).map(|(w, f)| w * f).collect())
    }

    /// Reorder atoms: atom `k` of the result is atom `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        AtomicMeasure {
            sites: perm.iter().map(|&k| self.sites[k]).collect(),
            weights: perm.iter().map(|&k| self.weights[k]).collect(),
        }
    }
}

/// Input of [`quantize_measure`].
#[derive(Clone, Debug, PartialEq)]
pub enum DensitySpec {
    /// Absolutely continuous measure `ρ dx` (`ScalarDensity::uniform()` is
    /// Lebesgue measure).
    Density(ScalarDensity),
    /// Weighted point samples, e.g. spikes.
    Samples { dim: usize, points: Vec<(Point, f64)> },
}

impl DensitySpec {
    pub fn lebesgue() -> Self {
        DensitySpec::Density(ScalarDensity::uniform())
    }

    pub fn spike(at: Point) -> Self {
        DensitySpec::Samples { dim: at.dim(), points: alloc::vec![(at, 1.0)] }
    }
}

/// Bin a measure onto `p = m^dim` equal cells. A continuous density gives an
/// atom at each cell center carrying the exact cell mass. Point samples give
/// an atom at the weighted barycenter of the samples in each cell, so spikes
/// are reproduced exactly. Empty cells are dropped and the weights
/// renormalized.
pub fn quantize_measure(spec: &DensitySpec, dim: usize, p: usize) -> Result<AtomicMeasure> {
    if !(1..=2).contains(&dim) || p == 0 {
        return Err(Error::InvalidInput("quantization needs dim 1 or 2 and p >= 1".into()));
    }
    let m = math::round(math::powf(p as f64, 1.0 / dim as f64)) as usize;
    if m.pow(dim as u32) != p {
        return Err(Error::InvalidInput(alloc::format!("{p} atoms is not a perfect power for dim {dim}")));
    }
    let h = 1.0 / m as f64;
    let cell_lo = |k: usize| {
        let mut lo = Point::zero(dim);
        let mut rest = k;
        for a in (0..dim).rev() {
            lo[a] = -0.5 + (rest % m) as f64 * h;
            rest /= m;
        }
        lo
    };
    let (sites, weights): (Vec<Point>, Vec<f64>) = match spec {
        DensitySpec::Density(rho) => {
            if rho.dim().is_some_and(|d| d != dim) {
                return Err(Error::DimensionMismatch { expected: dim, found: rho.dim().unwrap() });
            }
            (0..p)
                .map(|k| {
                    let lo = cell_lo(k);
                    let hi = lo + Point::splat(dim, h);
                    (lo + Point::splat(dim, 0.5 * h), rho.box_integral(&lo, &hi))
                })
                .filter(|(_, w)| *w > 0.0)
                .unzip()
        }
        DensitySpec::Samples { dim: sdim, points } => {
            if *sdim != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: *sdim });
            }
            let mut mass = alloc::vec![0.0; p];
            let mut moment = alloc::vec![Point::zero(dim); p];
            for (x, w) in points {
                if x.dim() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: x.dim() });
                }
                if !(w.is_finite() && *w >= 0.0) {
                    return Err(Error::InvalidInput("sample weights must be nonnegative".into()));
                }
                let y = wrap(x);
                let k = (0..dim).fold(0, |acc, a| {
                    acc * m + (math::floor((y[a] + 0.5) * m as f64) as usize).min(m - 1)
                });
                // Barycenter relative to the cell, so samples near the
                // wrap seam do not average across the torus.
                let rel = y - cell_lo(k);
                mass[k] += w;
                moment[k] = moment[k] + rel * *w;
            }
            (0..p)
                .filter(|k| mass[*k] > 0.0)
                .map(|k| (cell_lo(k) + moment[k] * (1.0 / mass[k]), mass[k]))
                .unzip()
        }
    };
    if sites.is_empty() {
        return Err(Error::ZeroMass);
    }
    AtomicMeasure::normalized(sites, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn lebesgue_quarters() {
        let q = quantize_measure(&DensitySpec::lebesgue(), 1, 4).unwrap();
        let xs: Vec<f64> = q.sites().iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![-0.375, -0.125, 0.125, 0.375]);
        assert!(q.weights().iter().all(|w| (w - 0.25).abs() < 1e-15));
    }

    #[test]
    fn spike_survives_alone() {
        let q = quantize_measure(&DensitySpec::spike(Point::new(&[0.0])), 1, 16).unwrap();
        assert_eq!(q.len(), 1);
        assert_eq!(q.weights(), &[1.0]);
        assert!(q.sites()[0][0].abs() < 1e-15);
    }

    #[test]
    fn cosine_bins_match_sine_differences() {
        let rho = ScalarDensity::cosine_1d(0.5).unwrap();
        let q = quantize_measure(&DensitySpec::Density(rho), 1, 4).unwrap();
        let tau = core::f64::consts::TAU;
        let prim = |x: f64| x + 0.5 * (tau * x).sin() / tau;
        let edges = [-0.5, -0.25, 0.0, 0.25, 0.5];
        for k in 0..4 {
            let exact = prim(edges[k + 1]) - prim(edges[k]);
            assert!((q.weights()[k] - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn validation() {
        assert!(AtomicMeasure::new(vec![Point::new(&[0.0])], vec![0.5]).is_err());
        assert!(AtomicMeasure::positive(vec![Point::new(&[0.0])], vec![0.5]).is_ok());
        assert!(AtomicMeasure::positive(vec![Point::new(&[0.0])], vec![-1.0]).is_err());
        assert!(quantize_measure(&DensitySpec::lebesgue(), 2, 5).is_err());
        let empty = DensitySpec::Samples { dim: 1, points: vec![(Point::new(&[0.1]), 0.0)] };
        assert_eq!(quantize_measure(&empty, 1, 4), Err(Error::ZeroMass));
    }
}
