//! Comparison principles as post-hoc verifiers: measure-domination
//! predicates and the pointwise inequalities they imply.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gconvex::{GridFunction, PeriodicFunction};
use crate::geometry::{wrap, Point};
use crate::ma_measure::chart::{chart_mass_in_box, ChartGrid};
use crate::ma_measure::{MAAtomicResult, PartitionMeasure};
use crate::math::exp;

/// Per-atom (or per-bin) ratios `e^{-u} M[u] / (e^{-v} M[v])`.
#[derive(Clone, Debug, PartialEq)]
pub struct DominationReport {
    pub ratios: Vec<f64>,
    /// Every ratio is at least `1 - tol`.
    pub dominated: bool,
    /// `min ratio - 1`.
    pub worst_margin: f64,
}

fn ratio(u: f64, mu: f64, v: f64, mv: f64) -> f64 {
    if mv <= 0.0 {
        return if mu <= 0.0 { 1.0 } else { f64::INFINITY };
    }
    exp(v - u) * mu / mv
}

fn report(ratios: Vec<f64>, tol: f64) -> DominationReport {
    let worst = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    DominationReport { dominated: worst >= 1.0 - tol, worst_margin: worst - 1.0, ratios }
}

/// Atomwise domination `e^{-u} M[u] ≥ e^{-v} M[v]` for measures on a common
/// site set.
pub fn dominates_twisted<U: PeriodicFunction + ?Sized, V: PeriodicFunction + ?Sized>(
    u: &U,
    mu: &MAAtomicResult,
    v: &V,
    mv: &MAAtomicResult,
    tol: f64,
) -> Result<DominationReport> {
    if mu.sites.len() != mv.sites.len()
        || mu.sites.iter().zip(&mv.sites).any(|(a, b)| (wrap(a) - wrap(b)).norm_inf() > 1e-12)
    {
        return Err(Error::SupportMismatch);
    }
    let ratios = mu
        .sites
        .iter()
        .zip(mu.masses.iter().zip(&mv.masses))
        .map(|(a, (m1, m2))| ratio(u.eval(a), *m1, v.eval(a), *m2))
        .collect();
    Ok(report(ratios, tol))
}

/// Bin-resolution domination, with `u` and `v` read at bin centers.
pub fn dominates_twisted_binned<U: PeriodicFunction + ?Sized, V: PeriodicFunction + ?Sized>(
    u: &U,
    mu: &PartitionMeasure,
    v: &V,
    mv: &PartitionMeasure,
    tol: f64,
) -> Result<DominationReport> {
    if mu.partition != mv.partition {
        return Err(Error::SupportMismatch);
    }
    let ratios = (0..mu.partition.len())
        .map(|i| {
            let x = mu.partition.center(i);
            ratio(u.eval(&x), mu.masses[i], v.eval(&x), mv.masses[i])
        })
        .collect();
    Ok(report(ratios, tol))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlobalComparison {
    pub pass: bool,
    /// `max (u - v)` over the evaluation grid.
    pub max_gap: f64,
    pub precondition_ok: bool,
}

/// Check `u ≤ v + tol` on an `m^dim` grid. Without domination the check is
/// still run but flagged as not covered by the comparison principle.
pub fn assert_global_comparison<U: PeriodicFunction + ?Sized, V: PeriodicFunction + ?Sized>(
    u: &U,
    v: &V,
    report: &DominationReport,
    m: usize,
    tol: f64,
) -> Result<GlobalComparison> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: v.dim() });
    }
    let max_gap = GridFunction::nodes(u.dim(), m).map(|x| u.eval(&x) - v.eval(&x)).fold(f64::NEG_INFINITY, f64::max);
    Ok(GlobalComparison { pass: max_gap <= tol, max_gap, precondition_ok: report.dominated })
}

#[derive(Clone, Debug, PartialEq)]
pub enum LocalComparison {
    Passed { gap: f64, at: Point },
    Failed { gap: f64, at: Point },
    Skipped(&'static str),
}

/// Local comparison on a chart window: when `e^{-u} M[u] ≥ e^{-v} M[v]` on
/// every bin of a `bins^dim` split of the window and `u - v` has a strict
/// interior maximum at `x₀`, then `u(x₀) ≤ v(x₀)`.
pub fn local_comparison_harness(
    u: &ChartGrid,
    v: &ChartGrid,
    bins: usize,
    slopes_per_axis: usize,
    tol: f64,
) -> Result<LocalComparison> {
    let diff = u.zip_with(v, |a, b| a - b)?;
    let n = diff.values().len();
    let interior_max = (0..n).filter(|i| diff.is_interior(*i)).max_by(|a, b| diff.values()[*a].total_cmp(&diff.values()[*b]));
    let boundary_max = (0..n).filter(|i| !diff.is_interior(*i)).map(|i| diff.values()[i]).fold(f64::NEG_INFINITY, f64::max);
    let Some(i0) = interior_max else { return Ok(LocalComparison::Skipped("window has no interior")) };
    if diff.values()[i0] <= boundary_max + 1e-12 {
        return Ok(LocalComparison::Skipped("no strict interior maximum of u - v"));
    }

    let dim = u.dim();
    let (ubox, vbox) = (u.slope_box(), v.slope_box());
    let mut lo = Point::zero(dim);
    let mut hi = Point::zero(dim);
    for a in 0..dim {
        lo[a] = ubox.0[a].min(vbox.0[a]);
        hi[a] = ubox.1[a].max(vbox.1[a]);
    }
    let slopes = (lo, hi);
    let (wlo, whi) = u.window();
    let width = (whi - wlo) / bins as f64;
    for b in 0..bins.pow(dim as u32) {
        let mut blo = Point::zero(dim);
        let mut rest = b;
        for a in (0..dim).rev() {
            blo[a] = wlo + (rest % bins) as f64 * width;
            rest /= bins;
        }
        let bhi = blo + Point::splat(dim, width);
        let centre = blo + Point::splat(dim, 0.5 * width);
        let region = Some((blo, bhi));
        let mu = chart_mass_in_box(u, &region, &slopes, slopes_per_axis);
        let mv = chart_mass_in_box(v, &region, &slopes, slopes_per_axis);
        let (uc, vc) = (u.eval_nearest(&centre), v.eval_nearest(&centre));
        if ratio(uc, mu, vc, mv) < 1.0 - tol {
            return Ok(LocalComparison::Skipped("domination fails on some bin"));
        }
    }
    let at = u.node(i0);
    let gap = diff.values()[i0];
    Ok(if gap <= tol { LocalComparison::Passed { gap, at } } else { LocalComparison::Failed { gap, at } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::EnvelopeFunction;
    use crate::geometry::ScalarDensity;
    use crate::ma_measure::ma_atomic;
    use alloc::vec;

    fn fixture() -> EnvelopeFunction {
        EnvelopeFunction::with_default_truncation(
            vec![Point::new(&[0.0]), Point::new(&[0.3]), Point::new(&[-0.25])],
            vec![0.0, 0.02, 0.01],
        )
        .unwrap()
    }

    #[test]
    fn shifted_pair_has_constant_ratio_e() {
        let u = fixture();
        let v = u.shifted(1.0);
        let rho = ScalarDensity::uniform();
        let (hu, hv) = (u.hull().unwrap(), v.hull().unwrap());
        let (mu, mv) = (ma_atomic(&u, &rho).unwrap(), ma_atomic(&v, &rho).unwrap());
        let r = dominates_twisted(&hu, &mu, &hv, &mv, 1e-12).unwrap();
        assert!(r.dominated);
        assert!(r.ratios.iter().all(|x| (x - core::f64::consts::E).abs() < 1e-12));
        let g = assert_global_comparison(&hu, &hv, &r, 512, 1e-8).unwrap();
        assert!(g.pass && (g.max_gap + 1.0).abs() < 1e-12);

        let same = dominates_twisted(&hu, &mu, &hu, &mu, 1e-12).unwrap();
        assert!(same.dominated && same.worst_margin.abs() < 1e-15);
        assert_eq!(assert_global_comparison(&hu, &hu, &same, 512, 1e-8).unwrap().max_gap, 0.0);
    }

    #[test]
    fn support_mismatch() {
        let u = fixture();
        let w = EnvelopeFunction::with_default_truncation(vec![Point::new(&[0.1])], vec![0.0]).unwrap();
        let rho = ScalarDensity::uniform();
        let r = dominates_twisted(
            &u.hull().unwrap(),
            &ma_atomic(&u, &rho).unwrap(),
            &w.hull().unwrap(),
            &ma_atomic(&w, &rho).unwrap(),
            1e-9,
        );
        assert_eq!(r, Err(Error::SupportMismatch));
    }

    #[test]
    fn local_harness_examples() {
        let v = ChartGrid::from_fn(1, -1.0, 1.0, 201, |x| 2.0 * x[0] * x[0]).unwrap();
        let c = -(2.0f64).ln() - 0.1;
        let u = ChartGrid::from_fn(1, -1.0, 1.0, 201, |x| 2.0 * x[0] * x[0] - (x[0] - 0.1).powi(2) + c).unwrap();
        match local_comparison_harness(&u, &v, 4, 2000, 0.05).unwrap() {
            LocalComparison::Passed { gap, .. } => assert!(gap < 0.0),
            other => panic!("{other:?}"),
        }
        assert!(matches!(local_comparison_harness(&v, &v, 4, 500, 0.05).unwrap(), LocalComparison::Skipped(_)));
    }
}
