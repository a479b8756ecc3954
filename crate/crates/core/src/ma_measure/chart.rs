//! Convex functions sampled on a box window of R^n (no periodicity), with
//! brute-force Alexandrov masses. These back the local measure lemmas.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{Point, MAX_DIM};

/// Samples of a function on `[lo, hi]^dim` at `m` nodes per axis, endpoints
/// included.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartGrid {
    dim: usize,
    lo: f64,
    hi: f64,
    m: usize,
    values: Vec<f64>,
}

impl ChartGrid {
    pub fn from_fn(dim: usize, lo: f64, hi: f64, m: usize, f: impl Fn(&Point) -> f64) -> Result<Self> {
        if !(1..=2).contains(&dim) || m < 3 || !(hi > lo) {
            return Err(Error::InvalidInput("chart window needs dim 1 or 2, m >= 3 and hi > lo".into()));
        }
        let mut g = ChartGrid { dim, lo, hi, m, values: Vec::new() };
        g.values = (0..m.pow(dim as u32)).map(|i| f(&g.node(i))).collect();
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(lo, hi)` of the window along every axis.
    pub fn window(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Value at the node nearest to `x`.
    pub fn eval_nearest(&self, x: &Point) -> f64 {
        let h = self.spacing();
        let i = (0..self.dim).fold(0, |acc, a| {
            let j = crate::math::round((x[a] - self.lo) / h).clamp(0.0, (self.m - 1) as f64) as usize;
            acc * self.m + j
        });
        self.values[i]
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.m - 1) as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn multi(&self, mut i: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for a in (0..self.dim).rev() {
            out[a] = i % self.m;
            i /= self.m;
        }
        out
    }

    pub fn node(&self, i: usize) -> Point {
        let j = self.multi(i);
        let mut p = Point::zero(self.dim);
        for a in 0..self.dim {
            p[a] = self.lo + j[a] as f64 * self.spacing();
        }
        p
    }

    pub fn is_interior(&self, i: usize) -> bool {
        let j = self.multi(i);
        (0..self.dim).all(|a| j[a] > 0 && j[a] + 1 < self.m)
    }

    pub fn zip_with(&self, other: &ChartGrid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if (self.dim, self.m, self.lo, self.hi) != (other.dim, other.m, other.lo, other.hi) {
            return Err(Error::InvalidInput("chart windows differ".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(ChartGrid { values, ..self.clone() })
    }

    /// Per-axis range of difference quotients. For a convex function every
    /// slope with an interior minimizer of `f - p·x` lies in this box.
    pub fn slope_box(&self) -> (Point, Point) {
        let mut lo = Point::splat(self.dim, f64::INFINITY);
        let mut hi = Point::splat(self.dim, f64::NEG_INFINITY);
        let h = self.spacing();
        for i in 0..self.values.len() {
            let j = self.multi(i);
            let mut stride = 1;
            for a in (0..self.dim).rev() {
                if j[a] + 1 < self.m {
                    let q = (self.values[i + stride] - self.values[i]) / h;
                    lo[a] = lo[a].min(q);
                    hi[a] = hi[a].max(q);
                }
                stride *= self.m;
            }
        }
        (lo, hi)
    }
}

/// Midpoints of an `n^dim` grid on a slope box, with the cell volume.
fn slope_grid(lo: &Point, hi: &Point, n: usize) -> (Vec<Point>, f64) {
    let dim = lo.dim();
    let mut cell = 1.0;
    for a in 0..dim {
        cell *= (hi[a] - lo[a]) / n as f64;
    }
    let pts = (0..n.pow(dim as u32))
        .map(|mut k| {
            let mut p = Point::zero(dim);
            for a in (0..dim).rev() {
                p[a] = lo[a] + ((k % n) as f64 + 0.5) * (hi[a] - lo[a]) / n as f64;
                k /= n;
            }
            p
        })
        .collect();
    (pts, cell)
}

/// Box region `[lo, hi]` of the window; `None` means the whole window.
pub type Region = Option<(Point, Point)>;

fn in_region(x: &Point, region: &Region) -> bool {
    match region {
        None => true,
        Some((lo, hi)) => (0..x.dim()).all(|a| x[a] >= lo[a] - 1e-12 && x[a] <= hi[a] + 1e-12),
    }
}

/// `|∂f(E)|` estimated over a slope box: a slope counts when the minimizer of
/// `f - p·x` over the nodes is an interior node lying in `E`.
pub fn chart_mass_in_box(f: &ChartGrid, region: &Region, slopes: &(Point, Point), n: usize) -> f64 {
    let (ps, cell) = slope_grid(&slopes.0, &slopes.1, n);
    let nodes: Vec<Point> = (0..f.values.len()).map(|i| f.node(i)).collect();
    let mut count = 0usize;
    for p in &ps {
        let mut best = f64::INFINITY;
        let mut arg = 0;
        for (i, x) in nodes.iter().enumerate() {
            let val = f.values[i] - p.dot(x);
            if val < best {
                best = val;
                arg = i;
            }
        }
        if f.is_interior(arg) && in_region(&nodes[arg], region) {
            count += 1;
        }
    }
    count as f64 * cell
}

/// [`chart_mass_in_box`] over the function's own slope box.
pub fn chart_mass(f: &ChartGrid, region: &Region, n: usize) -> f64 {
    chart_mass_in_box(f, region, &f.slope_box(), n)
}

/// `|∂f(x_i)|` at node `i`: the slopes `p` with `f(x) ≥ f(x_i) + p·(x - x_i)`
/// at every node, estimated on an `n^dim` grid over `slopes`.
pub fn subdifferential_at(f: &ChartGrid, i: usize, slopes: &(Point, Point), n: usize) -> f64 {
    let (ps, cell) = slope_grid(&slopes.0, &slopes.1, n);
    let x0 = f.node(i);
    let f0 = f.values[i];
    let nodes: Vec<(Point, f64)> = (0..f.values.len()).map(|j| (f.node(j) - x0, f.values[j] - f0)).collect();
    let inside = ps.iter().filter(|p| nodes.iter().all(|(d, df)| *df >= p.dot(d) - 1e-12)).count();
    inside as f64 * cell
}
