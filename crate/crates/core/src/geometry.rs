//! The flat torus `R^n / Z^n` as a Hessian manifold: periodic arithmetic,
//! lattice lifts, the metric potential `φ(x) = |x|²/2`, (-1)-densities and
//! affine charts.

use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::math;

/// Largest supported dimension. Exact hull paths use `dim <= 2`; dimension 3
/// is only used by sampling oracles.
pub const MAX_DIM: usize = 3;

/// A point (or vector) in `R^dim`, stored inline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    xs: [f64; MAX_DIM],
    dim: usize,
}

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&coords.len()),
            "point dimension must be in 1..={MAX_DIM}"
        );
        let mut xs = [0.0; MAX_DIM];
        xs[..coords.len()].copy_from_slice(coords);
        Point { xs, dim: coords.len() }
    }

    pub fn zero(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim));
        Point { xs: [0.0; MAX_DIM], dim }
    }

    pub fn splat(dim: usize, v: f64) -> Self {
        let mut p = Point::zero(dim);
        p.xs[..dim].iter_mut().for_each(|x| *x = v);
        p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.xs[..self.dim]
    }

    #[inline]
    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.coords().iter().zip(other.coords()).map(|(a, b)| a * b).sum()
    }

    #[inline]
    pub fn norm2(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        math::sqrt(self.norm2())
    }

    pub fn norm_inf(&self) -> f64 {
        self.coords().iter().fold(0.0, |m, v| m.max(math::abs(*v)))
    }
}

impl Index<usize> for Point {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        &self.coords()[i]
    }
}

impl IndexMut<usize> for Point {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.xs[..self.dim][i]
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(mut self, rhs: Point) -> Point {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..self.dim {
            self.xs[i] += rhs.xs[i];
        }
        self
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(mut self, rhs: Point) -> Point {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..self.dim {
            self.xs[i] -= rhs.xs[i];
        }
        self
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(mut self, s: f64) -> Point {
        for i in 0..self.dim {
            self.xs[i] *= s;
        }
        self
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        self * -1.0
    }
}

/// The torus `R^dim / Z^dim` with fundamental domain `[-1/2, 1/2)^dim`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TorusDomain {
    dim: usize,
}

impl TorusDomain {
    pub fn new(dim: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidInput(alloc::format!(
                "torus dimension must be in 1..={MAX_DIM}, got {dim}"
            )));
        }
        Ok(TorusDomain { dim })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Representative of `x mod Z^dim` in `[-1/2, 1/2)^dim`.
    pub fn wrap(&self, x: &Point) -> Point {
        debug_assert_eq!(x.dim(), self.dim);
        wrap(x)
    }

    /// All `k ∈ Z^dim` with `|k|_∞ <= radius`, lexicographic with the last
    /// axis varying fastest.
    pub fn lattice_shifts(&self, radius: usize) -> Vec<Point> {
        lattice_shifts(self.dim, radius)
    }

    /// Torus distance: the Euclidean length of the wrapped difference.
    pub fn distance(&self, x: &Point, y: &Point) -> f64 {
        wrap(&(*x - *y)).norm()
    }
}

#[inline]
pub(crate) fn wrap_scalar(x: f64) -> f64 {
    let mut r = x - math::floor(x + 0.5);
    if r < -0.5 {
        r += 1.0;
    }
    if r >= 0.5 {
        r = -0.5;
    }
    r
}

pub fn wrap(x: &Point) -> Point {
    let mut out = *x;
    for i in 0..x.dim() {
        out[i] = wrap_scalar(x[i]);
    }
    out
}

pub fn lattice_shifts(dim: usize, radius: usize) -> Vec<Point> {
    let r = radius as i64;
    let side = 2 * radius + 1;
    let count = side.pow(dim as u32);
    let mut out = Vec::with_capacity(count);
    for idx in 0..count {
        let mut p = Point::zero(dim);
        let mut rem = idx;
        for axis in (0..dim).rev() {
            p[axis] = (rem % side) as f64 - r as f64;
            rem /= side;
        }
        out.push(p);
    }
    out
}

/// The potential `φ(x) = |x|²/2` of the flat Hessian metric `g = Id`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MetricPotential;

impl MetricPotential {
    #[inline]
    pub fn value(&self, x: &Point) -> f64 {
        0.5 * x.norm2()
    }

    #[inline]
    pub fn gradient(&self, x: &Point) -> Point {
        *x
    }

    /// `φ(x + k) - φ(x) = <k, x> + |k|²/2`, affine in `x`.
    #[inline]
    pub fn shift_increment(&self, x: &Point, k: &Point) -> f64 {
        k.dot(x) + 0.5 * k.norm2()
    }
}

/// One term `amp · cos(2π <freq, x>)` of a cosine-series density.
#[derive(Clone, Debug, PartialEq)]
pub struct CosineTerm {
    pub freq: Vec<i64>,
    pub amp: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DensityKind {
    Constant(f64),
    Cosine { c0: f64, terms: Vec<CosineTerm> },
}

/// A strictly positive periodic (-1)-density on the torus.
///
/// Bounds are `c0 ± Σ|amp|`; they are attained for a single term and are
/// rigorous enclosures otherwise. Densities whose lower bound is not positive
/// are rejected.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarDensity {
    kind: DensityKind,
    min: f64,
    max: f64,
}

impl ScalarDensity {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidInput(alloc::format!(
                "constant density must be positive and finite, got {value}"
            )));
        }
        Ok(ScalarDensity { kind: DensityKind::Constant(value), min: value, max: value })
    }

    pub fn uniform() -> Self {
        ScalarDensity { kind: DensityKind::Constant(1.0), min: 1.0, max: 1.0 }
    }

    pub fn cosine(c0: f64, terms: Vec<CosineTerm>) -> Result<Self> {
        if let Some(first) = terms.first() {
            let dim = first.freq.len();
            if !(1..=MAX_DIM).contains(&dim) || terms.iter().any(|t| t.freq.len() != dim) {
                return Err(Error::InvalidInput(
                    "cosine terms must share a frequency dimension in 1..=3".into(),
                ));
            }
        }
        if !c0.is_finite() || terms.iter().any(|t| !t.amp.is_finite()) {
            return Err(Error::InvalidInput("density coefficients must be finite".into()));
        }
        let spread: f64 = terms.iter().map(|t| math::abs(t.amp)).sum();
        let (min, max) = (c0 - spread, c0 + spread);
        if min <= 0.0 {
            return Err(Error::InvalidInput(alloc::format!(
                "density is not strictly positive (lower bound {min})"
            )));
        }
        Ok(ScalarDensity { kind: DensityKind::Cosine { c0, terms }, min, max })
    }

    /// `1 + amp · cos(2π x_0)`, the standard non-constant fixture.
    pub fn cosine_1d(amp: f64) -> Result<Self> {
        Self::cosine(1.0, alloc::vec![CosineTerm { freq: alloc::vec![1], amp }])
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, DensityKind::Constant(_))
    }

    #[inline]
    pub fn min(&self) -> f64 {
        self.min
    }

    #[inline]
    pub fn max(&self) -> f64 {
        self.max
    }

    /// Frequency dimension of a cosine density (`None` for constants).
    pub fn dim(&self) -> Option<usize> {
        match &self.kind {
            DensityKind::Constant(_) => None,
            DensityKind::Cosine { terms, .. } => terms.first().map(|t| t.freq.len()),
        }
    }

    pub fn eval(&self, x: &Point) -> f64 {
        match &self.kind {
            DensityKind::Constant(v) => *v,
            DensityKind::Cosine { c0, terms } => {
                let mut acc = *c0;
                for t in terms {
                    let phase: f64 =
                        t.freq.iter().zip(x.coords()).map(|(f, xi)| *f as f64 * xi).sum();
                    acc += t.amp * math::cos(math::TAU * phase);
                }
                acc
            }
        }
    }

    /// Exact integral of the density over the axis-aligned box `[lo, hi]`.
    pub fn box_integral(&self, lo: &Point, hi: &Point) -> f64 {
        let vol: f64 = lo.coords().iter().zip(hi.coords()).map(|(a, b)| b - a).product();
        match &self.kind {
            DensityKind::Constant(v) => v * vol,
            DensityKind::Cosine { c0, terms } => {
                let mut acc = c0 * vol;
                for t in terms {
                    // Re Π_k ∫ exp(2πi f_k x_k) dx_k
                    let (mut re, mut im) = (1.0, 0.0);
                    for (axis, f) in t.freq.iter().enumerate() {
                        let (a, b) = (lo[axis], hi[axis]);
                        let (fr, fi) = if *f == 0 {
                            (b - a, 0.0)
                        } else {
                            let w = math::TAU * *f as f64;
                            // (e^{iwb} - e^{iwa}) / (iw)
                            let (dr, di) = (math::cos(w * b) - math::cos(w * a), math::sin(w * b) - math::sin(w * a));
                            (di / w, -dr / w)
                        };
                        let nr = re * fr - im * fi;
                        im = re * fi + im * fr;
                        re = nr;
                    }
                    acc += t.amp * re;
                }
                acc
            }
        }
    }
}

/// An affine coordinate change `x ↦ A x + b` with `det A != 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineChart {
    dim: usize,
    a: [[f64; MAX_DIM]; MAX_DIM],
    b: [f64; MAX_DIM],
}

impl AffineChart {
    /// `linear` is row-major `dim × dim`.
    pub fn new(dim: usize, linear: &[f64], translation: &[f64]) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) || linear.len() != dim * dim || translation.len() != dim {
            return Err(Error::InvalidInput("affine chart shape does not match dimension".into()));
        }
        let mut a = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..dim {
            for j in 0..dim {
                a[i][j] = linear[i * dim + j];
            }
        }
        let mut b = [0.0; MAX_DIM];
        b[..dim].copy_from_slice(translation);
        let chart = AffineChart { dim, a, b };
        let det = chart.det();
        let scale = linear.iter().fold(0.0f64, |m, v| m.max(math::abs(*v)));
        if !det.is_finite() || math::abs(det) <= 1e-12 * math::powf(scale, dim as f64).max(1e-300) {
            return Err(Error::SingularChart);
        }
        Ok(chart)
    }

    pub fn identity(dim: usize) -> Self {
        let mut linear = [0.0; MAX_DIM * MAX_DIM];
        for i in 0..dim {
            linear[i * dim + i] = 1.0;
        }
        Self::new(dim, &linear[..dim * dim], &[0.0; MAX_DIM][..dim]).expect("identity chart")
    }

    /// `x ↦ s x + b`.
    pub fn scaling(dim: usize, s: f64, translation: &[f64]) -> Result<Self> {
        let mut linear = [0.0; MAX_DIM * MAX_DIM];
        for i in 0..dim {
            linear[i * dim + i] = s;
        }
        Self::new(dim, &linear[..dim * dim], translation)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn det(&self) -> f64 {
        let a = &self.a;
        match self.dim {
            1 => a[0][0],
            2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
            _ => {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                    - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
        }
    }

    pub fn apply(&self, x: &Point) -> Point {
        let mut out = Point::zero(self.dim);
        for i in 0..self.dim {
            let mut acc = self.b[i];
            for j in 0..self.dim {
                acc += self.a[i][j] * x[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Applies the inverse map by solving `A y = x - b`.
    pub fn apply_inverse(&self, x: &Point) -> Point {
        let n = self.dim;
        let mut m = [0.0; MAX_DIM * MAX_DIM];
        let mut rhs = [0.0; MAX_DIM];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = self.a[i][j];
            }
            rhs[i] = x[i] - self.b[i];
        }
        math::lu_solve(&mut m[..n * n], n, &mut rhs[..n]).expect("chart is invertible");
        Point::new(&rhs[..n])
    }

    /// The chart `self ∘ inner`.
    pub fn compose(&self, inner: &AffineChart) -> AffineChart {
        assert_eq!(self.dim, inner.dim);
        let n = self.dim;
        let mut a = [[0.0; MAX_DIM]; MAX_DIM];
        let mut b = [0.0; MAX_DIM];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = (0..n).map(|k| self.a[i][k] * inner.a[k][j]).sum();
            }
            b[i] = self.b[i] + (0..n).map(|k| self.a[i][k] * inner.b[k]).sum::<f64>();
        }
        AffineChart { dim: n, a, b }
    }
}

/// Transition law of a (-1)-density: the local value is multiplied by
/// `|det A|` when passing through the chart.
pub fn transform_density(rho_value: f64, chart: &AffineChart) -> f64 {
    rho_value * math::abs(chart.det())
}
