use alloc::vec::Vec;

use super::GridFunction;
use crate::error::{Error, Result};
use crate::geometry::MAX_DIM;
use crate::math::{self, bump};

/// Radial bump mollifier `ρ_δ(x) = δ^{-n} ρ̃(x/δ)`, discretized on the grid
/// and renormalized to unit mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MollifierSpec {
    pub delta: f64,
}

impl MollifierSpec {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.25) {
            return Err(Error::InvalidInput(alloc::format!("mollifier radius {delta} outside (0, 1/4)")));
        }
        Ok(MollifierSpec { delta })
    }
}

/// Grid offsets within radius `delta` and their normalized bump weights.
pub(crate) fn stencil(dim: usize, h: f64, delta: f64) -> Vec<([i64; MAX_DIM], f64)> {
    let r = math::floor(delta / h) as i64;
    let mut out = Vec::new();
    let span = (2 * r + 1) as usize;
    for flat in 0..span.pow(dim as u32) {
        let mut off = [0i64; MAX_DIM];
        let mut rest = flat;
        let mut d2 = 0.0;
        for a in (0..dim).rev() {
            off[a] = (rest % span) as i64 - r;
            rest /= span;
            d2 += (off[a] as f64 * h) * (off[a] as f64 * h);
        }
        let w = bump(math::sqrt(d2) / delta);
        if w > 0.0 {
            out.push((off, w));
        }
    }
    let total: f64 = out.iter().map(|(_, w)| w).sum();
    for (_, w) in &mut out {
        *w /= total;
    }
    out
}

/// Periodic convolution `u ⋆ ρ_δ`. Because `φ` is quadratic this is also the
/// chart-wise regularization of `φ + u`, so grid-scale g-convexity is kept
/// exactly, and `‖u_δ - u‖_∞ ≤ Lip(u) δ`.
pub fn mollify_global(u: &GridFunction, spec: &MollifierSpec) -> Result<GridFunction> {
    let MollifierSpec { delta } = MollifierSpec::new(spec.delta)?;
    let dim = u.dim();
    let st = stencil(dim, u.spacing(), delta);
    let values: Vec<f64> = (0..u.values().len())
        .map(|i| {
            let c = u.multi(i);
            st.iter()
                .map(|(off, w)| {
                    let mut j = c;
                    for a in 0..dim {
                        j[a] += off[a];
                    }
                    w * u.at(&j[..dim])
                })
                .sum()
        })
        .collect();
    GridFunction::new(dim, u.resolution(), values)
}
