use alloc::vec::Vec;

use crate::envelope::{EnvelopeFunction, HULL_TOL_1D, HULL_TOL_2D};
use crate::error::Result;
use crate::geometry::{Point, ScalarDensity};

/// Geometry of a subdifferential cell in slope space.
#[derive(Clone, Debug, PartialEq)]
pub enum CellGeometry {
    Empty,
    /// `[v'(a-), v'(a+)]` in 1D.
    Interval { lo: f64, hi: f64 },
    /// Counter-clockwise convex polygon in 2D.
    Polygon(Vec<Point>),
}

/// The subdifferential `∂v(a_i)` of `v = φ + u` at a site.
#[derive(Clone, Debug, PartialEq)]
pub struct SubdiffCell {
    pub site: usize,
    pub geometry: CellGeometry,
    /// Lebesgue measure of the cell; zero iff the site is inactive.
    pub volume: f64,
}

impl SubdiffCell {
    pub fn new(site: usize, geometry: CellGeometry, volume: f64) -> Self {
        SubdiffCell { site, geometry, volume }
    }

    pub fn empty(site: usize) -> Self {
        SubdiffCell { site, geometry: CellGeometry::Empty, volume: 0.0 }
    }

    pub fn is_active(&self) -> bool {
        self.volume > 0.0
    }

    /// Extreme points of the cell.
    pub fn vertices(&self) -> Vec<Point> {
        match &self.geometry {
            CellGeometry::Empty => Vec::new(),
            CellGeometry::Interval { lo, hi } => alloc::vec![Point::new(&[*lo]), Point::new(&[*hi])],
            CellGeometry::Polygon(v) => v.clone(),
        }
    }
}

/// Subdifferential cell of `v = φ + u` at site `i`.
pub fn subdifferential(f: &EnvelopeFunction, i: usize) -> Result<SubdiffCell> {
    f.cell(i)
}

/// Atomic Monge-Ampère measure of an envelope function.
#[derive(Clone, Debug, PartialEq)]
pub struct MAAtomicResult {
    pub sites: Vec<Point>,
    /// `H_i = ρ(a_i) · vol(∂v(a_i))`.
    pub masses: Vec<f64>,
    pub volumes: Vec<f64>,
    pub total: f64,
    pub truncation: usize,
    pub hull_tol: f64,
}

/// Exact atomic masses `H_i = ρ(a_i) |∂v(a_i)|`.
pub fn ma_atomic(f: &EnvelopeFunction, rho: &ScalarDensity) -> Result<MAAtomicResult> {
    let hull = f.hull()?;
    let volumes: Vec<f64> = hull.cells().iter().map(|c| c.volume).collect();
    let masses: Vec<f64> = f.sites().iter().zip(&volumes).map(|(a, vol)| rho.eval(a) * vol).collect();
    let total = masses.iter().sum();
    Ok(MAAtomicResult {
        sites: f.sites().to_vec(),
        masses,
        volumes,
        total,
        truncation: f.truncation(),
        hull_tol: if f.dim() == 1 { HULL_TOL_1D } else { HULL_TOL_2D },
    })
}

/// Bounds `a <= ∫ M_ρ[u] <= b` valid for every g-convex `u` on the torus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassBounds {
    pub a: f64,
    pub b: f64,
}

impl MassBounds {
    /// The cells of any g-convex function tile a unit-volume fundamental
    /// domain of slopes, so the total mass is a ρ-average: `a = min ρ`,
    /// `b = max ρ`.
    pub fn for_density(rho: &ScalarDensity) -> Self {
        MassBounds { a: rho.min(), b: rho.max() }
    }

    pub fn contains(&self, mass: f64, tol: f64) -> bool {
        mass >= self.a - tol && mass <= self.b + tol
    }
}

pub trait TotalMass {
    fn total_mass(&self) -> f64;
}

impl TotalMass for MAAtomicResult {
    fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }
}

pub fn total_mass<M: TotalMass + ?Sized>(m: &M) -> f64 {
    m.total_mass()
}

/// Counter-clockwise convex hull of planar points (monotone chain).
pub fn convex_hull_2d(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|p, q| p[0].partial_cmp(&q[0]).unwrap().then(p[1].partial_cmp(&q[1]).unwrap()));
    pts.dedup_by(|p, q| (*p - *q).norm_inf() <= 1e-15);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: &Point, a: &Point, b: &Point| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for p in &pts {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    let lower_len = hull.len() + 1;
    for p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    hull
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::polygon_area;
    use alloc::vec;
    use proptest::prelude::*;

    fn p1(x: f64) -> Point {
        Point::new(&[x])
    }

    #[test]
    fn atomic_examples_1d() {
        let rho1 = ScalarDensity::uniform();
        let single = EnvelopeFunction::with_default_truncation(vec![p1(0.0)], vec![0.0]).unwrap();
        let r = ma_atomic(&single, &rho1).unwrap();
        assert!((r.masses[0] - 1.0).abs() < 1e-15);

        let two = EnvelopeFunction::with_default_truncation(vec![p1(0.0), p1(0.5)], vec![0.0, 0.0]).unwrap();
        let r = ma_atomic(&two, &rho1).unwrap();
        assert!((r.masses[0] - 0.5).abs() < 1e-15 && (r.masses[1] - 0.5).abs() < 1e-15);

        let cosine = ScalarDensity::cosine_1d(0.5).unwrap();
        let r = ma_atomic(&single, &cosine).unwrap();
        assert!((r.masses[0] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn subdifferential_examples() {
        let single = EnvelopeFunction::with_default_truncation(vec![p1(0.0)], vec![0.0]).unwrap();
        let c = subdifferential(&single, 0).unwrap();
        assert_eq!(c.geometry, CellGeometry::Interval { lo: -0.5, hi: 0.5 });
        assert_eq!(c.volume, 1.0);

        let lifted = EnvelopeFunction::with_default_truncation(vec![p1(0.0), p1(0.3)], vec![0.0, 2.0]).unwrap();
        let c = subdifferential(&lifted, 1).unwrap();
        assert_eq!(c.geometry, CellGeometry::Empty);
        assert_eq!(c.volume, 0.0);
    }

    #[test]
    fn hull_of_two_squares() {
        let sq = |cx: f64| {
            vec![
                Point::new(&[cx, 0.0]),
                Point::new(&[cx + 1.0, 0.0]),
                Point::new(&[cx + 1.0, 1.0]),
                Point::new(&[cx, 1.0]),
            ]
        };
        let mut pts = sq(0.0);
        pts.extend(sq(2.0));
        let h = convex_hull_2d(&pts);
        assert_eq!(h.len(), 4);
        assert!((polygon_area(h.iter()) - 3.0).abs() < 1e-15);
    }

    fn random_envelope_1d(xs: &[f64], vals: &[f64]) -> Option<EnvelopeFunction> {
        EnvelopeFunction::with_default_truncation(xs.iter().map(|x| p1(*x)).collect(), vals.to_vec()).ok()
    }

    proptest! {
        #[test]
        fn tiling_is_exact_in_1d(xs in proptest::collection::vec(-0.5f64..0.5, 1..12),
                                 vals in proptest::collection::vec(-0.3f64..0.3, 12)) {
            let Some(f) = random_envelope_1d(&xs, &vals[..xs.len()]) else { return Ok(()); };
            let r = ma_atomic(&f, &ScalarDensity::uniform()).unwrap();
            prop_assert!((r.total - 1.0).abs() <= 1e-12, "total {}", r.total);
        }

        #[test]
        fn masses_are_translation_invariant(xs in proptest::collection::vec(-0.5f64..0.5, 1..8),
                                            vals in proptest::collection::vec(-0.3f64..0.3, 8),
                                            t in -5.0f64..5.0) {
            let Some(f) = random_envelope_1d(&xs, &vals[..xs.len()]) else { return Ok(()); };
            let a = ma_atomic(&f, &ScalarDensity::uniform()).unwrap();
            let b = ma_atomic(&f.shifted(t), &ScalarDensity::uniform()).unwrap();
            for (x, y) in a.masses.iter().zip(&b.masses) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn tiling_within_tolerance_in_2d(xs in proptest::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 1..7),
                                         vals in proptest::collection::vec(-0.2f64..0.2, 7)) {
            let sites = xs.iter().map(|(a, b)| Point::new(&[*a, *b])).collect();
            let Ok(f) = EnvelopeFunction::with_default_truncation(sites, vals[..xs.len()].to_vec()) else { return Ok(()); };
            let r = ma_atomic(&f, &ScalarDensity::uniform()).unwrap();
            prop_assert!((r.total - 1.0).abs() <= 1e-6, "total {}", r.total);
        }
    }
}
