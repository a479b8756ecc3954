//! Envelope functions: the largest g-convex function lying below prescribed
//! values `s_i` at sites `a_i`.
//!
//! Writing `v = φ + u`, the function `v` is the lower convex hull of the
//! lifted points `(a_i + k, φ(a_i + k) + s_i)` over lattice shifts `k`. The
//! subdifferential of `v` at a lifted site is the set of slopes `p` for which
//! that site minimizes `y_j - <p, x_j>` over all lifted points, i.e. an
//! intersection of half-spaces `<p, x_j - a_i> <= y_j - y_i`. Cells are
//! computed that way (half-lines in 1D, clipped polygons in 2D); the hull
//! itself is recovered as the maximum of the supporting planes attached to
//! the cell vertices.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gconvex::PeriodicFunction;
use crate::geometry::{lattice_shifts, wrap, MetricPotential, Point};
use crate::ma_measure::{CellGeometry, SubdiffCell};

/// Default lattice truncation radius.
pub const DEFAULT_TRUNCATION: usize = 3;
/// Activity tolerance for 1D cells (slope gap).
pub const HULL_TOL_1D: f64 = 1e-12;
/// Activity tolerance for 2D cells (polygon area).
pub const HULL_TOL_2D: f64 = 1e-9;

/// A g-convex function encoded by sites, values and a lattice truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeFunction {
    sites: Vec<Point>,
    values: Vec<f64>,
    truncation: usize,
}

impl EnvelopeFunction {
    pub fn new(sites: Vec<Point>, values: Vec<f64>, truncation: usize) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidInput("envelope function needs at least one site".into()));
        }
        if sites.len() != values.len() {
            return Err(Error::InvalidInput(alloc::format!(
                "{} sites but {} values",
                sites.len(),
                values.len()
            )));
        }
        let dim = sites[0].dim();
        if dim > 2 {
            return Err(Error::InvalidInput("exact envelope hulls support dim 1 and 2 only".into()));
        }
        if let Some(bad) = sites.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.dim() });
        }
        if truncation < 2 {
            return Err(Error::InvalidInput("lattice truncation must be at least 2".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("envelope values must be finite".into()));
        }
        let sites: Vec<Point> = sites.iter().map(wrap).collect();
        for i in 0..sites.len() {
            for j in 0..i {
                if wrap(&(sites[i] - sites[j])).norm_inf() < 1e-12 {
                    return Err(Error::InvalidInput(alloc::format!(
                        "sites {j} and {i} coincide on the torus"
                    )));
                }
            }
        }
        Ok(EnvelopeFunction { sites, values, truncation })
    }

    pub fn with_default_truncation(sites: Vec<Point>, values: Vec<f64>) -> Result<Self> {
        Self::new(sites, values, DEFAULT_TRUNCATION)
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

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Same sites and truncation, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.sites.len());
        EnvelopeFunction { sites: self.sites.clone(), values, truncation: self.truncation }
    }

    /// Adds `t` to every value; the represented function shifts by `t`.
    pub fn shifted(&self, t: f64) -> Self {
        self.with_values(self.values.iter().map(|v| v + t).collect())
    }

    pub fn set_value(&mut self, i: usize, v: f64) {
        self.values[i] = v;
    }

    pub fn hull(&self) -> Result<LowerHull> {
        LowerHull::build(self)
    }

    /// Subdifferential cell of `v = φ + u` at site `i`, computed on its own.
    pub fn cell(&self, i: usize) -> Result<SubdiffCell> {
        let lifted = Lifted::new(self);
        match self.dim() {
            1 => lifted.cell_1d(i),
            _ => lifted.cell_2d(i),
        }
    }

    fn lifted_value(&self, i: usize, k: &Point) -> f64 {
        let a = self.sites[i];
        MetricPotential.value(&(a + *k)) + self.values[i]
    }
}

/// Evaluates `u(x)` for the envelope function (builds the hull).
pub fn envelope_eval(f: &EnvelopeFunction, x: &Point) -> Result<f64> {
    Ok(f.hull()?.eval(x))
}

struct LiftedPoint {
    x: Point,
    y: f64,
    site: usize,
    /// `|k|_∞` of the lattice copy.
    ring: usize,
}

/// All lifted points `(a_i + k, φ(a_i + k) + s_i)`, `|k|_∞ <= K`.
struct Lifted<'a> {
    f: &'a EnvelopeFunction,
    points: Vec<LiftedPoint>,
}

impl<'a> Lifted<'a> {
    fn new(f: &'a EnvelopeFunction) -> Self {
        let shifts = lattice_shifts(f.dim(), f.truncation);
        let mut points = Vec::with_capacity(shifts.len() * f.len());
        for k in &shifts {
            let ring = k.norm_inf() as usize;
            for i in 0..f.len() {
                points.push(LiftedPoint { x: f.sites[i] + *k, y: f.lifted_value(i, k), site: i, ring });
            }
        }
        Lifted { f, points }
    }

    fn base(&self, i: usize) -> (Point, f64) {
        (self.f.sites[i], self.f.lifted_value(i, &Point::zero(self.f.dim())))
    }

    fn is_self(&self, pt: &LiftedPoint, i: usize) -> bool {
        pt.site == i && pt.ring == 0
    }

    fn cell_1d(&self, i: usize) -> Result<SubdiffCell> {
        let (a, y) = self.base(i);
        let k = self.f.truncation;
        let (mut lo, mut lo_ring) = (f64::NEG_INFINITY, 0);
        let (mut hi, mut hi_ring) = (f64::INFINITY, 0);
        for pt in &self.points {
            if self.is_self(pt, i) {
                continue;
            }
            if pt.x[0] < a[0] {
                let s = slope(pt.x[0], pt.y, a[0], y);
                if s > lo {
                    lo = s;
                    lo_ring = pt.ring;
                }
            } else {
                let s = slope(a[0], y, pt.x[0], pt.y);
                if s < hi {
                    hi = s;
                    hi_ring = pt.ring;
                }
            }
        }
        if hi - lo <= HULL_TOL_1D {
            return Ok(SubdiffCell::empty(i));
        }
        if lo_ring >= k || hi_ring >= k || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::TruncationTooSmall { site: i, truncation: k });
        }
        Ok(SubdiffCell::new(i, CellGeometry::Interval { lo, hi }, hi - lo))
    }

    fn cell_2d(&self, i: usize) -> Result<SubdiffCell> {
        const BOX_LABEL: usize = usize::MAX;
        let (a, y) = self.base(i);
        let k = self.f.truncation;
        // Own lattice copies confine the cell to a + [-1/2, 1/2]^2.
        let mut poly: Vec<(Point, usize)> = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
            .iter()
            .map(|(dx, dy)| (a + Point::new(&[*dx, *dy]), BOX_LABEL))
            .collect();
        let mut order: Vec<usize> = (0..self.points.len()).filter(|&j| !self.is_self(&self.points[j], i)).collect();
        order.sort_by(|&p, &q| {
            let dp = (self.points[p].x - a).norm2();
            let dq = (self.points[q].x - a).norm2();
            dp.partial_cmp(&dq).unwrap().then(p.cmp(&q))
        });
        let mut scratch = Vec::with_capacity(16);
        for &j in &order {
            let pt = &self.points[j];
            let normal = pt.x - a;
            let rhs = pt.y - y;
            clip(&poly, &normal, rhs, j, &mut scratch);
            core::mem::swap(&mut poly, &mut scratch);
            if poly.len() < 3 {
                return Ok(SubdiffCell::empty(i));
            }
        }
        let area = polygon_area(poly.iter().map(|(p, _)| p));
        if area <= HULL_TOL_2D {
            return Ok(SubdiffCell::empty(i));
        }
        for (_, label) in &poly {
            if *label == BOX_LABEL || self.points[*label].ring >= k {
                return Err(Error::TruncationTooSmall { site: i, truncation: k });
            }
        }
        let vertices = poly.into_iter().map(|(p, _)| p).collect();
        Ok(SubdiffCell::new(i, CellGeometry::Polygon(vertices), area))
    }
}

#[inline]
fn slope(x0: f64, y0: f64, x1: f64, y1: f64) -> f64 {
    (y1 - y0) / (x1 - x0)
}

/// Clips a convex polygon (vertices tagged with the label of their outgoing
/// edge) by `<p, normal> <= rhs`.
fn clip(poly: &[(Point, usize)], normal: &Point, rhs: f64, label: usize, out: &mut Vec<(Point, usize)>) {
    out.clear();
    let scale = normal.norm() * 1e-14 + math_abs(rhs) * 1e-14;
    let m = poly.len();
    let vals: Vec<f64> = poly.iter().map(|(p, _)| p.dot(normal) - rhs).collect();
    if vals.iter().all(|v| *v <= scale) {
        out.extend_from_slice(poly);
        return;
    }
    for t in 0..m {
        let (cur, lab) = poly[t];
        let nxt = poly[(t + 1) % m].0;
        let (fc, fn_) = (vals[t], vals[(t + 1) % m]);
        let cin = fc <= scale;
        let nin = fn_ <= scale;
        if cin {
            out.push((cur, lab));
            if !nin {
                let s = fc / (fc - fn_);
                out.push((cur + (nxt - cur) * s, label));
            }
        } else if nin {
            let s = fc / (fc - fn_);
            out.push((cur + (nxt - cur) * s, lab));
        }
    }
    // Drop consecutive duplicates produced by vertices lying on the line.
    let mut w = 0;
    for r in 0..out.len() {
        if w > 0 && (out[r].0 - out[w - 1].0).norm_inf() <= 1e-15 {
            out[w - 1].1 = out[r].1;
            continue;
        }
        out[w] = out[r];
        w += 1;
    }
    out.truncate(w);
    if out.len() > 1 && (out[0].0 - out[out.len() - 1].0).norm_inf() <= 1e-15 {
        out.pop();
    }
}

#[inline]
fn math_abs(x: f64) -> f64 {
    crate::math::abs(x)
}

pub(crate) fn polygon_area<'p>(pts: impl Iterator<Item = &'p Point> + Clone) -> f64 {
    let v: Vec<&Point> = pts.collect();
    let m = v.len();
    if m < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for t in 0..m {
        let (p, q) = (v[t], v[(t + 1) % m]);
        acc += p[0] * q[1] - p[1] * q[0];
    }
    0.5 * acc
}

/// A supporting plane `x ↦ <slope, x> + intercept` of `v`.
#[derive(Clone, Copy, Debug)]
struct Plane {
    slope: Point,
    intercept: f64,
}

/// The computed lower hull of an envelope function: subdifferential cells of
/// every site and the supporting planes of the hull facets.
#[derive(Clone, Debug)]
pub struct LowerHull {
    dim: usize,
    truncation: usize,
    cells: Vec<SubdiffCell>,
    planes: Vec<Plane>,
}

impl LowerHull {
    pub fn build(f: &EnvelopeFunction) -> Result<Self> {
        let lifted = Lifted::new(f);
        let cells = match f.dim() {
            1 => build_cells_1d(f, &lifted)?,
            _ => (0..f.len()).map(|i| lifted.cell_2d(i)).collect::<Result<Vec<_>>>()?,
        };
        let dim = f.dim();
        let mut planes = Vec::new();
        // Facets containing points of the fundamental domain have a vertex
        // among the copies with |k|_∞ <= 1.
        for k in lattice_shifts(dim, 1) {
            for cell in &cells {
                let i = cell.site;
                let a = f.sites[i] + k;
                let y = f.lifted_value(i, &k);
                for p in cell.vertices() {
                    let slope = p + k;
                    planes.push(Plane { slope, intercept: y - slope.dot(&a) });
                }
            }
        }
        Ok(LowerHull { dim, truncation: f.truncation, cells, planes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn cells(&self) -> &[SubdiffCell] {
        &self.cells
    }

    /// `v(x)` on the universal cover near the fundamental domain.
    pub fn eval_convex(&self, x: &Point) -> f64 {
        self.planes
            .iter()
            .map(|pl| pl.slope.dot(x) + pl.intercept)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `u(x) = v(x) - φ(x)` at the wrapped point.
    pub fn eval(&self, x: &Point) -> f64 {
        let w = wrap(x);
        self.eval_convex(&w) - MetricPotential.value(&w)
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.cells[i].volume > 0.0
    }
}

impl PeriodicFunction for LowerHull {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &Point) -> f64 {
        LowerHull::eval(self, x)
    }
}

/// Monotone-chain lower hull of the sorted lifted points; cells are the slope
/// intervals between consecutive hull vertices.
fn build_cells_1d(f: &EnvelopeFunction, lifted: &Lifted<'_>) -> Result<Vec<SubdiffCell>> {
    let pts = &lifted.points;
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&p, &q| pts[p].x[0].partial_cmp(&pts[q].x[0]).unwrap());
    let mut hull: Vec<usize> = Vec::with_capacity(pts.len());
    for &c in &order {
        while hull.len() >= 2 {
            let (a, b) = (&pts[hull[hull.len() - 2]], &pts[hull[hull.len() - 1]]);
            let pc = &pts[c];
            let left = slope(a.x[0], a.y, b.x[0], b.y);
            let right = slope(b.x[0], b.y, pc.x[0], pc.y);
            if right - left <= HULL_TOL_1D {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(c);
    }
    let mut cells: Vec<SubdiffCell> = (0..f.len()).map(SubdiffCell::empty).collect();
    for h in 0..hull.len() {
        let pt = &pts[hull[h]];
        if pt.ring != 0 {
            continue;
        }
        let i = pt.site;
        if h == 0 || h + 1 == hull.len() {
            return Err(Error::TruncationTooSmall { site: i, truncation: f.truncation });
        }
        let (l, r) = (&pts[hull[h - 1]], &pts[hull[h + 1]]);
        if l.ring >= f.truncation || r.ring >= f.truncation {
            return Err(Error::TruncationTooSmall { site: i, truncation: f.truncation });
        }
        let lo = slope(l.x[0], l.y, pt.x[0], pt.y);
        let hi = slope(pt.x[0], pt.y, r.x[0], r.y);
        cells[i] = SubdiffCell::new(i, CellGeometry::Interval { lo, hi }, hi - lo);
    }
    Ok(cells)
}
