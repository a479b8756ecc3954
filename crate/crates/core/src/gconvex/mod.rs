//! g-convex functions on the flat torus: grid representation, closure
//! operations (max, smooth max, convex reparametrization), regularization and
//! the compactness constants of the sup-normalized class.

mod cone;
mod grid;
mod mollify;
mod regularize;
mod reparam;
mod smooth_max;

pub use cone::cone_subsolution;
pub use grid::{check_gconvex, gmax, lipschitz_and_bounds, FnPeriodic, GConvexReport, GridFunction, GridStats};
pub use mollify::{mollify_global, MollifierSpec};
pub use regularize::{regularize_charts, ChartCover, ChartPatch, RegularizationConfig, RegularizationReport};
pub use reparam::{compose_reparam, Reparam};
pub use smooth_max::{smooth_max, SmoothMaxSpec};

use crate::envelope::{envelope_eval, EnvelopeFunction};
use crate::error::Result;
use crate::geometry::Point;
use crate::math;

/// A Z^n-periodic function on R^n, evaluated at arbitrary points.
pub trait PeriodicFunction {
    fn dim(&self) -> usize;
    fn eval(&self, x: &Point) -> f64;
}

impl<T: PeriodicFunction + ?Sized> PeriodicFunction for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, x: &Point) -> f64 {
        (**self).eval(x)
    }
}

/// Pointwise maximum of two periodic functions.
#[derive(Clone, Debug)]
pub struct Max<A, B>(pub A, pub B);

impl<A: PeriodicFunction, B: PeriodicFunction> PeriodicFunction for Max<A, B> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, x: &Point) -> f64 {
        self.0.eval(x).max(self.1.eval(x))
    }
}

/// `C₁` (Lipschitz) and `C₀` (lower bound) for sup-normalized g-convex
/// functions on the unit torus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompactnessConstants {
    pub c0: f64,
    pub c1: f64,
}

impl CompactnessConstants {
    pub fn torus(dim: usize) -> Self {
        CompactnessConstants { c0: dim as f64 / 2.0, c1: math::sqrt(dim as f64) }
    }
}

/// Grid version of `u - sup u`.
pub fn normalize_sup(u: &GridFunction) -> GridFunction {
    let sup = u.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    u.map(|v| v - sup)
}

/// Sup of an envelope function: coarse grid search followed by zooming in on
/// the best candidates until the step drops below 1e-10.
pub fn envelope_sup(f: &EnvelopeFunction) -> Result<(f64, Point)> {
    let hull = f.hull()?;
    let dim = f.dim();
    let m = if dim == 1 { 256 } else { 64 };
    let mut cands: alloc::vec::Vec<(f64, Point)> = GridFunction::nodes(dim, m)
        .map(|x| (hull.eval(&x), x))
        .collect();
    cands.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    cands.truncate(4);
    let mut best = cands[0];
    let offsets = crate::geometry::lattice_shifts(dim, 2);
    for (mut val, mut x) in cands {
        let mut h = 1.0 / m as f64;
        while h > 1e-10 {
            let mut improved = true;
            while improved {
                improved = false;
                for d in &offsets {
                    let y = x + *d * (h / 2.0);
                    let w = hull.eval(&y);
                    if w > val {
                        val = w;
                        x = y;
                        improved = true;
                    }
                }
            }
            h /= 4.0;
        }
        if val > best.0 {
            best = (val, x);
        }
    }
    // Sites are where kinks meet; always include them.
    for a in f.sites() {
        let w = envelope_eval(f, a)?;
        if w > best.0 {
            best = (w, *a);
        }
    }
    Ok((best.0, crate::geometry::wrap(&best.1)))
}

/// Envelope version of `u - sup u`.
pub fn normalize_sup_envelope(f: &EnvelopeFunction) -> Result<EnvelopeFunction> {
    let (sup, _) = envelope_sup(f)?;
    Ok(f.shifted(-sup))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn single_site_sup_is_one_eighth() {
        let f = EnvelopeFunction::with_default_truncation(vec![Point::new(&[0.0])], vec![0.0]).unwrap();
        let (sup, at) = envelope_sup(&f).unwrap();
        assert!((sup - 0.125).abs() < 1e-10, "{sup}");
        assert!((at[0].abs() - 0.5).abs() < 1e-6);
        let g = normalize_sup_envelope(&f).unwrap();
        let (s2, _) = envelope_sup(&g).unwrap();
        assert!(s2.abs() < 1e-10);
        let g2 = normalize_sup_envelope(&g).unwrap();
        assert!((g2.values()[0] - g.values()[0]).abs() < 1e-10);
    }

    #[test]
    fn constant_grid_normalizes_to_zero() {
        let u = GridFunction::constant(2, 8, 3.0).unwrap();
        assert!(normalize_sup(&u).values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn torus_constants() {
        let c = CompactnessConstants::torus(2);
        assert_eq!(c.c0, 1.0);
        assert!((c.c1 - core::f64::consts::SQRT_2).abs() < 1e-15);
    }
}
