use alloc::vec::Vec;

use super::GridFunction;
use crate::error::{Error, Result};

const SLOPE_TOL: f64 = 1e-12;

/// A convex, nondecreasing, 1-Lipschitz scalar function, stored as a
/// piecewise-linear table on `[lo, hi]` and extended linearly beyond it.
#[derive(Clone, Debug, PartialEq)]
pub struct Reparam {
    lo: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl Reparam {
    /// Tabulate `chi` on `n + 1` equispaced knots and verify the slope bounds.
    pub fn tabulate(lo: f64, hi: f64, n: usize, chi: impl Fn(f64) -> f64) -> Result<Self> {
        if !(hi > lo) || n == 0 {
            return Err(Error::InvalidInput("reparametrization table needs hi > lo and n >= 1".into()));
        }
        let step = (hi - lo) / n as f64;
        let values: Vec<f64> = (0..=n).map(|k| chi(lo + k as f64 * step)).collect();
        Self::from_table(lo, step, values)
    }

    pub fn from_table(lo: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("reparametrization table needs two finite values".into()));
        }
        let slopes: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]) / step).collect();
        for &s in &slopes {
            if !(-SLOPE_TOL..=1.0 + SLOPE_TOL).contains(&s) {
                return Err(Error::SlopeBound { slope: s });
            }
        }
        if slopes.windows(2).any(|w| w[1] < w[0] - SLOPE_TOL) {
            return Err(Error::InvalidInput("reparametrization is not convex".into()));
        }
        Ok(Reparam { lo, step, values, slopes })
    }

    pub fn identity() -> Self {
        Reparam { lo: 0.0, step: 1.0, values: alloc::vec![0.0, 1.0], slopes: alloc::vec![1.0] }
    }

    pub fn constant(c: f64) -> Self {
        Reparam { lo: 0.0, step: 1.0, values: alloc::vec![c, c], slopes: alloc::vec![0.0] }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.slopes.len();
        let k = crate::math::floor((t - self.lo) / self.step);
        let k = if k < 0.0 { 0 } else if k as usize >= n { n - 1 } else { k as usize };
        self.values[k] + self.slopes[k] * (t - self.lo - k as f64 * self.step)
    }
}

/// `χ ∘ u` for an admissible reparametrization χ.
pub fn compose_reparam(u: &GridFunction, chi: &Reparam) -> GridFunction {
    u.map(|v| chi.eval(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gconvex::check_gconvex;
    use crate::math::{exp, ln};

    #[test]
    fn identity_and_constant() {
        let u = GridFunction::from_fn(1, 32, |x| x[0].abs() / 2.0).unwrap();
        let v = compose_reparam(&u, &Reparam::identity());
        assert!(u.sup_distance(&v).unwrap() < 1e-15);
        let c = compose_reparam(&u, &Reparam::constant(2.0));
        assert!(c.values().iter().all(|v| *v == 2.0));
    }

    #[test]
    fn slope_violation_is_rejected() {
        let r = Reparam::tabulate(-1.0, 1.0, 10, |t| 2.0 * t);
        assert!(matches!(r, Err(Error::SlopeBound { .. })));
        assert!(Reparam::tabulate(-1.0, 1.0, 10, |t| -t * t).is_err());
    }

    #[test]
    fn softplus_preserves_gconvexity() {
        let chi = Reparam::tabulate(-2.0, 2.0, 4000, |t| ln(1.0 + exp(t))).unwrap();
        let u = GridFunction::from_fn(1, 128, |x| x[0].abs() / 2.0 - x[0] * x[0] / 2.0).unwrap();
        assert!(check_gconvex(&u, 1e-9).pass);
        assert!(check_gconvex(&compose_reparam(&u, &chi), 1e-9).pass);
    }
}
