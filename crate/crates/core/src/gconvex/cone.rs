use super::{check_gconvex, GridFunction};
use crate::error::{Error, Result};
use crate::geometry::{wrap, Point};
use crate::math;

/// Smooth step: 0 for `s <= 0`, 1 for `s >= 1`.
fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let a = math::exp(-1.0 / s);
    let b = math::exp(-1.0 / (1.0 - s));
    a / (a + b)
}

/// `ε χ(x) |x - a|` sampled on an `m`-grid, with `χ ≡ 1` on `B(a, r/2)` and
/// `χ ≡ 0` outside `B(a, r)`. Its Monge-Ampère measure has an atom at `a`
/// carrying the slopes of the cone, so it serves as a local subsolution.
pub fn cone_subsolution(a: &Point, eps: f64, r: f64, m: usize) -> Result<GridFunction> {
    if !(eps > 0.0) || !(r > 0.0 && r <= 0.5) {
        return Err(Error::InvalidInput(alloc::format!("cone needs eps > 0 and r in (0, 1/2], got {eps}, {r}")));
    }
    let u = GridFunction::from_fn(a.dim(), m, |x| {
        let d = wrap(&(*x - *a)).norm();
        eps * smooth_step(2.0 * (r - d) / r) * d
    })?;
    let report = check_gconvex(&u, 1e-9);
    if !report.pass {
        return Err(Error::PostCheckFailed { worst: report.worst });
    }
    Ok(u)
}
