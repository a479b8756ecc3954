use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{self, bump, gauss_legendre5, integrate};

const CDF_KNOTS: usize = 2048;

/// Regularized maximum `max_ε(t) = E[max_i (t_i + ε S_i)]` with `S_i` i.i.d.
/// with the even bump density `γ ∝ exp(-1/(1-s²))` on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothMaxSpec {
    eps: f64,
    panels: usize,
    norm: f64,
    cdf: Vec<f64>,
}

impl SmoothMaxSpec {
    pub fn new(eps: f64) -> Result<Self> {
        Self::with_panels(eps, 64)
    }

    /// `panels` five-point Gauss-Legendre panels are used for the outer
    /// integral.
    pub fn with_panels(eps: f64, panels: usize) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() || panels == 0 {
            return Err(Error::InvalidInput("smooth max needs eps > 0 and at least one panel".into()));
        }
        let norm = integrate(-1.0, 1.0, 256, bump);
        let h = 2.0 / CDF_KNOTS as f64;
        let mut cdf = Vec::with_capacity(CDF_KNOTS + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for k in 0..CDF_KNOTS {
            let a = -1.0 + k as f64 * h;
            acc += gauss_legendre5(a, a + h, bump) / norm;
            cdf.push(acc);
        }
        Ok(SmoothMaxSpec { eps, panels, norm, cdf })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// The normalized profile γ.
    pub fn gamma(&self, s: f64) -> f64 {
        bump(s) / self.norm
    }

    /// `P(S <= s)`, by cubic Hermite interpolation of the tabulated CDF.
    pub fn gamma_cdf(&self, s: f64) -> f64 {
        if s <= -1.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        let h = 2.0 / CDF_KNOTS as f64;
        let t = (s + 1.0) / h;
        let k = (math::floor(t) as usize).min(CDF_KNOTS - 1);
        let x = t - k as f64;
        let (y0, y1) = (self.cdf[k], self.cdf[k + 1]);
        let a = -1.0 + k as f64 * h;
        let (d0, d1) = (self.gamma(a) * h, self.gamma(a + h) * h);
        let x2 = x * x;
        let x3 = x2 * x;
        (2.0 * x3 - 3.0 * x2 + 1.0) * y0 + (x3 - 2.0 * x2 + x) * d0 + (-2.0 * x3 + 3.0 * x2) * y1 + (x3 - x2) * d1
    }

    /// `(∫γ, ∫sγ)`, for checking the normalization.
    pub fn moments(&self) -> (f64, f64) {
        (
            integrate(-1.0, 1.0, 512, |s| self.gamma(s)),
            integrate(-1.0, 1.0, 512, |s| s * self.gamma(s)),
        )
    }
}

/// Regularized max of `t`. Monotone and convex in `t`, within `ε` of
/// `max t`, and exactly `max t` once the top entry leads the rest by `2ε`.
pub fn smooth_max(t: &[f64], spec: &SmoothMaxSpec) -> f64 {
    assert!(!t.is_empty(), "smooth max of an empty vector");
    let eps = spec.eps;
    let mut top = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for &x in t {
        if x > top {
            second = top;
            top = x;
        } else if x > second {
            second = x;
        }
    }
    if t.len() > 1 && top - second >= 2.0 * eps {
        return top;
    }
    // E[max] = L + ∫_L^U (1 - Π F_i), with L a common lower bound of the
    // supports and U = top + ε.
    let lower = top - eps;
    let upper = top + eps;
    let relevant: Vec<f64> = t.iter().cloned().filter(|x| x + eps > lower).collect();
    let tail = integrate(lower, upper, spec.panels, |x| {
        1.0 - relevant.iter().map(|ti| spec.gamma_cdf((x - ti) / eps)).product::<f64>()
    });
    lower + tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// `κ₂ = ∫∫ max(s₁, s₂) γ(s₁) γ(s₂)` by plain tensor Gauss-Legendre.
    fn kappa2_tensor(spec: &SmoothMaxSpec, panels: usize) -> f64 {
        integrate(-1.0, 1.0, panels, |s1| {
            integrate(-1.0, 1.0, panels, |s2| s1.max(s2) * spec.gamma(s2)) * spec.gamma(s1)
        })
    }

    #[test]
    fn profile_is_normalized() {
        let spec = SmoothMaxSpec::new(0.1).unwrap();
        let (m0, m1) = spec.moments();
        assert!((m0 - 1.0).abs() < 1e-12 && m1.abs() < 1e-14);
        assert!((spec.gamma_cdf(0.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn separated_and_single_arguments() {
        let spec = SmoothMaxSpec::new(0.25).unwrap();
        assert_eq!(smooth_max(&[0.0, 1.0], &spec), 1.0);
        assert!((smooth_max(&[0.7], &spec) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn tie_matches_tensor_quadrature() {
        let spec = SmoothMaxSpec::new(0.1).unwrap();
        let k2 = kappa2_tensor(&spec, 400);
        assert!(k2 > 0.1);
        let got = smooth_max(&[0.0, 0.0], &spec);
        assert!((got - 0.1 * k2).abs() < 1e-6, "{got} vs {}", 0.1 * k2);
    }

    proptest! {
        #[test]
        fn monotone_bounded_convex(t in proptest::collection::vec(-1.0f64..1.0, 1..5),
                                   i in 0usize..5, d in 0.0f64..0.3, eps in 0.01f64..0.5,
                                   s in proptest::collection::vec(-1.0f64..1.0, 5)) {
            let spec = SmoothMaxSpec::new(eps).unwrap();
            let i = i % t.len();
            let base = smooth_max(&t, &spec);
            let top = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(base >= top - 1e-12 && base <= top + eps + 1e-12);
            let mut up = t.clone();
            up[i] += d;
            prop_assert!(smooth_max(&up, &spec) >= base - 1e-12);
            let other: Vec<f64> = s[..t.len()].to_vec();
            let mid: Vec<f64> = t.iter().zip(&other).map(|(a, b)| 0.5 * (a + b)).collect();
            let rhs = 0.5 * (base + smooth_max(&other, &spec));
            prop_assert!(smooth_max(&mid, &spec) <= rhs + 1e-10);
        }
    }
}
