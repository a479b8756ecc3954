//! The measure lemmas as executable checks.

use alloc::vec::Vec;

use super::chart::{chart_mass, chart_mass_in_box, ChartGrid, Region};
use super::{convex_hull_2d, SubdiffCell};
use crate::envelope::{polygon_area, EnvelopeFunction};
use crate::error::{Error, Result};
use crate::geometry::{Point, ScalarDensity};

/// Outcome of a lemma check: the two sides (one entry per site for atomic
/// checks, a single entry otherwise) and whether `lhs >= rhs - tol` held.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaReport {
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `min(lhs - rhs)`.
    pub worst_margin: f64,
    pub pass: bool,
    /// Whether the hypotheses of the lemma held on the inputs.
    pub precondition_ok: bool,
}

impl LemmaReport {
    fn new(lhs: Vec<f64>, rhs: Vec<f64>, tol: f64, precondition_ok: bool) -> Self {
        let worst_margin = lhs.iter().zip(&rhs).map(|(l, r)| l - r).fold(f64::INFINITY, f64::min);
        LemmaReport { pass: worst_margin >= -tol, lhs, rhs, worst_margin, precondition_ok }
    }
}

/// Volume of `conv(A ∪ B)` for two cells.
fn hull_volume(a: &SubdiffCell, b: &SubdiffCell, dim: usize) -> f64 {
    let mut pts = a.vertices();
    pts.extend(b.vertices());
    if pts.is_empty() {
        return 0.0;
    }
    if dim == 1 {
        let lo = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        return hi - lo;
    }
    let hull = convex_hull_2d(&pts);
    if hull.len() < 3 {
        return 0.0;
    }
    polygon_area(hull.iter())
}

/// `M[max(u, v)] ≥ 1_{u≥v} M[u] + 1_{u<v} M[v]` at every shared site.
///
/// The left side is exact: where one function is strictly larger at a site
/// the max coincides with it nearby, and at a tie the subdifferential of the
/// max is the convex hull of the two subdifferentials.
pub fn check_max_inequality(
    u: &EnvelopeFunction,
    v: &EnvelopeFunction,
    rho: &ScalarDensity,
    tol: f64,
) -> Result<LemmaReport> {
    if u.sites() != v.sites() {
        return Err(Error::SupportMismatch);
    }
    let hu = u.hull()?;
    let hv = v.hull()?;
    let dim = u.dim();
    let mut lhs = Vec::with_capacity(u.len());
    let mut rhs = Vec::with_capacity(u.len());
    for (i, a) in u.sites().iter().enumerate() {
        let (ua, va) = (hu.eval(a), hv.eval(a));
        let (cu, cv) = (&hu.cells()[i], &hv.cells()[i]);
        let w = rho.eval(a);
        let gap = ua - va;
        let max_vol = if gap > 1e-12 {
            cu.volume
        } else if gap < -1e-12 {
            cv.volume
        } else {
            hull_volume(cu, cv, dim)
        };
        lhs.push(w * max_vol);
        rhs.push(w * if ua >= va { cu.volume } else { cv.volume });
    }
    Ok(LemmaReport::new(lhs, rhs, tol, true))
}

/// `M[f + g](E) ≥ M[f](E) + M[g](E)` by brute-force chart masses on an
/// `n^dim` slope grid.
pub fn check_superadditivity(f: &ChartGrid, g: &ChartGrid, region: &Region, n: usize, tol: f64) -> Result<LemmaReport> {
    let sum = f.zip_with(g, |a, b| a + b)?;
    let lhs = chart_mass(&sum, region, n);
    let rhs = chart_mass(f, region, n) + chart_mass(g, region, n);
    Ok(LemmaReport::new(alloc::vec![lhs], alloc::vec![rhs], tol, true))
}

/// `M[v](Ω) ≤ M[u](Ω)` for `u ≤ v` in Ω with `u = v` on the boundary. A
/// violated hypothesis is reported through `precondition_ok`.
pub fn check_mass_comparison(u: &ChartGrid, v: &ChartGrid, n: usize, tol: f64) -> Result<LemmaReport> {
    let diff = u.zip_with(v, |a, b| a - b)?;
    let precondition_ok = diff.values().iter().enumerate().all(|(i, d)| {
        if diff.is_interior(i) {
            *d <= 1e-12
        } else {
            d.abs() <= 1e-12
        }
    });
    let (bu, bv) = (u.slope_box(), v.slope_box());
    let dim = u.dim();
    let mut lo = Point::zero(dim);
    let mut hi = Point::zero(dim);
    for a in 0..dim {
        lo[a] = bu.0[a].min(bv.0[a]);
        hi[a] = bu.1[a].max(bv.1[a]);
    }
    let slopes = (lo, hi);
    let mu = chart_mass_in_box(u, &None, &slopes, n);
    let mv = chart_mass_in_box(v, &None, &slopes, n);
    Ok(LemmaReport::new(alloc::vec![mu], alloc::vec![mv], tol, precondition_ok))
}


#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn max_of_equal_and_shifted() {
        let sites = vec![Point::new(&[0.0]), Point::new(&[0.3]), Point::new(&[-0.2])];
        let u = EnvelopeFunction::with_default_truncation(sites, vec![0.0, 0.05, 0.02]).unwrap();
        let rho = ScalarDensity::uniform();
        let r = check_max_inequality(&u, &u, &rho, 1e-9).unwrap();
        assert!(r.pass && r.worst_margin.abs() < 1e-12);
        let r = check_max_inequality(&u, &u.shifted(-1.0), &rho, 1e-9).unwrap();
        assert!(r.pass && r.worst_margin.abs() < 1e-12);
    }

    #[test]
    fn mass_comparison_cone_vs_quadratic() {
        let u = ChartGrid::from_fn(1, -1.0, 1.0, 401, |x| x[0].abs() - 1.0).unwrap();
        let v = ChartGrid::from_fn(1, -1.0, 1.0, 401, |x| (x[0] * x[0] - 1.0) / 2.0).unwrap();
        let r = check_mass_comparison(&u, &v, 4000, 0.02).unwrap();
        assert!(r.precondition_ok && r.pass);
        assert!((r.lhs[0] - 2.0).abs() < 0.02 && (r.rhs[0] - 2.0).abs() < 0.02);
        let w = ChartGrid::from_fn(1, -1.0, 1.0, 401, |x| (x[0].abs() - 1.0).max((x[0] * x[0] - 1.0) / 2.0 - 0.1)).unwrap();
        let r = check_mass_comparison(&u, &w, 4000, 0.02).unwrap();
        assert!(r.precondition_ok && r.pass, "{r:?}");
    }

    #[test]
    fn quadratic_superadditivity() {
        let q = ChartGrid::from_fn(2, -1.0, 1.0, 41, |x| 0.5 * x.norm2()).unwrap();
        let r = check_superadditivity(&q, &q, &None, 120, 0.05).unwrap();
        assert!(r.pass);
        assert!(r.lhs[0] > 3.0 * 4.0 * 0.9, "{:?}", r);
    }
}
