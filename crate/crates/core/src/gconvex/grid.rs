use alloc::vec::Vec;

use super::PeriodicFunction;
use crate::error::{Error, Result};
use crate::geometry::{wrap_scalar, Point, MAX_DIM};
use crate::math;

/// A periodic function sampled at the nodes `x_j = -1/2 + j/m` of a uniform
/// grid, evaluated between nodes by multilinear interpolation.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    dim: usize,
    m: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(dim: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) || m < 2 {
            return Err(Error::InvalidInput(alloc::format!("grid of dim {dim} and resolution {m}")));
        }
        if values.len() != m.pow(dim as u32) {
            return Err(Error::InvalidInput(alloc::format!(
                "grid of resolution {m} in dim {dim} needs {} values, got {}",
                m.pow(dim as u32),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("grid values must be finite".into()));
        }
        Ok(GridFunction { dim, m, values })
    }

    pub fn constant(dim: usize, m: usize, c: f64) -> Result<Self> {
        Self::new(dim, m, alloc::vec![c; m.pow(dim as u32)])
    }

    pub fn from_fn(dim: usize, m: usize, f: impl Fn(&Point) -> f64) -> Result<Self> {
        let values = Self::nodes(dim, m).map(|x| f(&x)).collect();
        Self::new(dim, m, values)
    }

    pub fn sample<F: PeriodicFunction + ?Sized>(f: &F, m: usize) -> Result<Self> {
        Self::from_fn(f.dim(), m, |x| f.eval(x))
    }

    /// Grid nodes in storage order (last axis fastest).
    pub fn nodes(dim: usize, m: usize) -> impl Iterator<Item = Point> {
        (0..m.pow(dim as u32)).map(move |i| node_point(dim, m, i))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.m
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn node(&self, i: usize) -> Point {
        node_point(self.dim, self.m, i)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction { dim: self.dim, m: self.m, values: self.values.iter().map(|v| f(*v)).collect() }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(GridFunction { dim: self.dim, m: self.m, values })
    }

    pub(crate) fn check_compatible(&self, other: &GridFunction) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        if self.m != other.m {
            return Err(Error::ResolutionMismatch { left: self.m, right: other.m });
        }
        Ok(())
    }

    /// Value at an integer multi-index, taken periodically.
    pub fn at(&self, idx: &[i64]) -> f64 {
        self.values[self.flat(idx)]
    }

    pub(crate) fn flat(&self, idx: &[i64]) -> usize {
        let m = self.m as i64;
        idx.iter().take(self.dim).fold(0usize, |acc, j| acc * self.m + j.rem_euclid(m) as usize)
    }

    pub(crate) fn multi(&self, mut i: usize) -> [i64; MAX_DIM] {
        let mut out = [0i64; MAX_DIM];
        for a in (0..self.dim).rev() {
            out[a] = (i % self.m) as i64;
            i /= self.m;
        }
        out
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn inf(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `max |self - other|` over nodes.
    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| math::abs(a - b)).fold(0.0, f64::max))
    }
}

fn node_point(dim: usize, m: usize, mut i: usize) -> Point {
    let mut p = Point::zero(dim);
    for a in (0..dim).rev() {
        p[a] = -0.5 + (i % m) as f64 / m as f64;
        i /= m;
    }
    p
}

impl PeriodicFunction for GridFunction {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &Point) -> f64 {
        let mut base = [0i64; MAX_DIM];
        let mut frac = [0.0; MAX_DIM];
        for a in 0..self.dim {
            let t = (wrap_scalar(x[a]) + 0.5) * self.m as f64;
            let j = math::floor(t);
            base[a] = j as i64;
            frac[a] = t - j;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << self.dim) {
            let mut w = 1.0;
            let mut idx = base;
            for a in 0..self.dim {
                if corner >> a & 1 == 1 {
                    idx[a] += 1;
                    w *= frac[a];
                } else {
                    w *= 1.0 - frac[a];
                }
            }
            if w != 0.0 {
                acc += w * self.at(&idx[..self.dim]);
            }
        }
        acc
    }
}

/// A closure viewed as a periodic function.
pub struct FnPeriodic<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&Point) -> f64> PeriodicFunction for FnPeriodic<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &Point) -> f64 {
        (self.f)(x)
    }
}

/// Axis and diagonal stencil directions (one of each ± pair).
pub(crate) fn stencil_directions(dim: usize) -> Vec<[i64; MAX_DIM]> {
    let mut out = Vec::new();
    for a in 0..dim {
        let mut d = [0; MAX_DIM];
        d[a] = 1;
        out.push(d);
    }
    for a in 0..dim {
        for b in a + 1..dim {
            for s in [1, -1] {
                let mut d = [0; MAX_DIM];
                d[a] = 1;
                d[b] = s;
                out.push(d);
            }
        }
    }
    out
}

/// Outcome of the grid-scale convexity test. Passing is necessary, not
/// sufficient, for g-convexity of the interpolant.
#[derive(Clone, Debug, PartialEq)]
pub struct GConvexReport {
    pub pass: bool,
    /// Smallest normalized second difference of `φ + u`; `1` for `u ≡ 0`.
    pub worst: f64,
    pub worst_at: Point,
}

/// Check that second differences of `φ + u`, normalized by `h²|d|²`, are at
/// least `-tol` along axis and diagonal directions.
pub fn check_gconvex(u: &GridFunction, tol: f64) -> GConvexReport {
    let dirs = stencil_directions(u.dim);
    let h2 = u.spacing() * u.spacing();
    let mut worst = f64::INFINITY;
    let mut worst_at = Point::zero(u.dim);
    for i in 0..u.values.len() {
        let c = u.multi(i);
        let ui = u.values[i];
        for d in &dirs {
            let mut p = c;
            let mut q = c;
            let mut len2 = 0;
            for a in 0..u.dim {
                p[a] += d[a];
                q[a] -= d[a];
                len2 += d[a] * d[a];
            }
            let s = (u.at(&p[..u.dim]) + u.at(&q[..u.dim]) - 2.0 * ui) / (h2 * len2 as f64) + 1.0;
            if s < worst {
                worst = s;
                worst_at = u.node(i);
            }
        }
    }
    GConvexReport { pass: worst >= -tol, worst, worst_at }
}

/// Pointwise maximum of two grid functions on the same grid.
pub fn gmax(u: &GridFunction, v: &GridFunction) -> Result<GridFunction> {
    u.zip_with(v, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridStats {
    pub lip: f64,
    pub inf: f64,
    pub sup: f64,
}

/// Grid Lipschitz estimate (largest difference quotient over the stencil)
/// together with the extrema.
pub fn lipschitz_and_bounds(u: &GridFunction) -> GridStats {
    let dirs = stencil_directions(u.dim);
    let h = u.spacing();
    let mut lip: f64 = 0.0;
    for i in 0..u.values.len() {
        let c = u.multi(i);
        for d in &dirs {
            let mut p = c;
            let mut len2 = 0;
            for a in 0..u.dim {
                p[a] += d[a];
                len2 += d[a] * d[a];
            }
            lip = lip.max(math::abs(u.at(&p[..u.dim]) - u.values[i]) / (h * math::sqrt(len2 as f64)));
        }
    }
    GridStats { lip, inf: u.inf(), sup: u.sup() }
}
