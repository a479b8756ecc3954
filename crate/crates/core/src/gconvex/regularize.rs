use alloc::vec::Vec;

use super::{check_gconvex, smooth_max, GridFunction, PeriodicFunction, SmoothMaxSpec};
use crate::error::{Error, Result};
use crate::geometry::{wrap, AffineChart, Point};
use crate::math::{self, bump};

/// One chart of the cover: an affine coordinate map defined on the box
/// `U = center + (-u_half, u_half)^n` whose core `V` has half-width `v_half`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPatch {
    pub chart: AffineChart,
    pub center: Point,
    pub u_half: f64,
    pub v_half: f64,
}

impl ChartPatch {
    /// Lift of `x` next to the center, if it lies in `U`.
    fn lift(&self, x: &Point) -> Option<Point> {
        let d = wrap(&(*x - self.center));
        if d.norm_inf() < self.u_half {
            Some(self.center + d)
        } else {
            None
        }
    }

    fn in_core(&self, x: &Point) -> bool {
        wrap(&(*x - self.center)).norm_inf() <= self.v_half
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartCover {
    pub dim: usize,
    pub patches: Vec<ChartPatch>,
}

impl ChartCover {
    /// Two charts per axis: the identity around 0 and `y = 2(x - 1/2)`
    /// around 1/2, with products of these in higher dimension.
    pub fn two_per_axis(dim: usize) -> Result<Self> {
        let mut patches = Vec::new();
        for mask in 0..(1usize << dim) {
            let mut center = Point::zero(dim);
            let mut linear = alloc::vec![0.0; dim * dim];
            let mut translation = alloc::vec![0.0; dim];
            for a in 0..dim {
                let second = mask >> a & 1 == 1;
                let s = if second { 2.0 } else { 1.0 };
                center[a] = if second { 0.5 } else { 0.0 };
                linear[a * dim + a] = s;
                translation[a] = -s * center[a];
            }
            patches.push(ChartPatch {
                chart: AffineChart::new(dim, &linear, &translation)?,
                center,
                u_half: 0.45,
                v_half: 0.3,
            });
        }
        let cover = ChartCover { dim, patches };
        cover.validate()?;
        Ok(cover)
    }

    /// Every core `V_i` sits strictly inside its `U_i` and the cores cover a
    /// fine probe grid of the torus.
    pub fn validate(&self) -> Result<()> {
        if self.patches.iter().any(|p| !(p.v_half < p.u_half && p.u_half < 0.5)) {
            return Err(Error::InvalidInput("chart core must sit strictly inside a chart smaller than the torus".into()));
        }
        let probe = if self.dim == 1 { 4096 } else { 96 };
        for x in GridFunction::nodes(self.dim, probe) {
            if !self.patches.iter().any(|p| p.in_core(&x)) {
                return Err(Error::InvalidInput(alloc::format!("chart cores miss {:?}", x.coords())));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularizationConfig {
    pub cover: ChartCover,
    /// Depth of the cutoff `η_i` at the edge of `U_i`, in units of `Bε`.
    pub c_cut: f64,
    /// Gluing width as a fraction of ε.
    pub gluing_ratio: f64,
    /// Quadrature nodes per axis and side of the convolution stencil.
    pub stencil_half: usize,
    /// Output grid resolution.
    pub resolution: usize,
}

impl RegularizationConfig {
    pub fn default_for(dim: usize) -> Result<Self> {
        Ok(RegularizationConfig {
            cover: ChartCover::two_per_axis(dim)?,
            c_cut: 10.0,
            gluing_ratio: 2e-3,
            stencil_half: if dim == 1 { 24 } else { 6 },
            resolution: if dim == 1 { 1024 } else { 96 },
        })
    }
}

/// Constants of one regularization run.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularizationReport {
    pub eps: f64,
    pub gluing_eps: f64,
    /// Largest disagreement of the chart convolutions on overlaps.
    pub discrepancy: f64,
    pub b: f64,
    pub c2: f64,
    pub c_cut: f64,
    /// The rescaling is by `1 / (1 + lambda)`, `lambda = C₂ B ε`.
    pub lambda: f64,
    pub post_check_worst: f64,
}

/// Profile of the cutoff across the collar `V ⊂ U`: 0 at the core, 1 at the
/// chart edge, smooth.
fn collar(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = math::exp(-1.0 / t);
    let b = math::exp(-1.0 / (1.0 - t));
    a / (a + b)
}

/// `η_i` for unit depth, as a function of the lifted point.
fn eta(p: &ChartPatch, x: &Point) -> f64 {
    let w = p.u_half - p.v_half;
    (0..x.dim()).map(|a| -collar((math::abs(x[a] - p.center[a]) - p.v_half) / w)).sum()
}

/// Largest negative curvature of the unit-depth cutoff, in torus units.
fn eta_curvature(p: &ChartPatch) -> f64 {
    let w = p.u_half - p.v_half;
    let n = 20_000;
    let h = 1.0 / n as f64;
    let mut worst: f64 = 0.0;
    for k in 1..n {
        let t = k as f64 * h;
        let d2 = (collar(t + h) - 2.0 * collar(t) + collar(t - h)) / (h * h);
        worst = worst.max(d2);
    }
    worst / (w * w)
}

/// Chart-gluing regularization of a g-convex function: convolve `φ_i + u` in
/// each chart, subtract `φ_i`, push down near the chart edge by `Bε η_i`,
/// glue with a smooth max and rescale by `1 / (1 + C₂ B ε)`.
pub fn regularize_charts<F: PeriodicFunction + ?Sized>(
    u: &F,
    eps: f64,
    cfg: &RegularizationConfig,
) -> Result<(GridFunction, RegularizationReport)> {
    let dim = u.dim();
    if dim != cfg.cover.dim || dim > 2 {
        return Err(Error::DimensionMismatch { expected: cfg.cover.dim, found: dim });
    }
    if !(eps > 0.0 && eps < 0.25) || !(cfg.c_cut > 0.0) || !(cfg.gluing_ratio > 0.0) {
        return Err(Error::InvalidInput("regularization needs eps in (0, 1/4), c_cut > 0, gluing_ratio > 0".into()));
    }
    let m = cfg.resolution;
    let nodes: Vec<Point> = GridFunction::nodes(dim, m).collect();

    // Quadrature stencil for the mollifier of radius eps in chart coordinates.
    let q = cfg.stencil_half as i64;
    let span = (2 * q + 1) as usize;
    let mut stencil: Vec<(Point, f64)> = Vec::new();
    for flat in 0..span.pow(dim as u32) {
        let mut z = Point::zero(dim);
        let mut rest = flat;
        for a in (0..dim).rev() {
            z[a] = ((rest % span) as i64 - q) as f64 / q as f64;
            rest /= span;
        }
        let w = bump(z.norm());
        if w > 0.0 {
            stencil.push((z, w));
        }
    }
    let total: f64 = stencil.iter().map(|(_, w)| w).sum();

    // Per chart: smoothed values on the nodes inside U_i.
    let mut smoothed: Vec<Vec<Option<(f64, Point)>>> = Vec::with_capacity(cfg.cover.patches.len());
    for p in &cfg.cover.patches {
        // Radius ε in torus units, expressed in this chart's coordinates.
        let radius = eps * math::powf(math::abs(p.chart.det()), 1.0 / dim as f64);
        let col = nodes
            .iter()
            .map(|x| {
                let xl = p.lift(x)?;
                let y = p.chart.apply(&xl);
                let phi_i = |y: &Point| 0.5 * p.chart.apply_inverse(y).norm2();
                let conv: f64 = stencil
                    .iter()
                    .map(|(z, w)| {
                        let yz = y - *z * radius;
                        w * (phi_i(&yz) + u.eval(&p.chart.apply_inverse(&yz)))
                    })
                    .sum::<f64>()
                    / total;
                Some((conv - phi_i(&y), xl))
            })
            .collect();
        smoothed.push(col);
    }

    let mut discrepancy: f64 = 0.0;
    for k in 0..nodes.len() {
        let vals: Vec<f64> = smoothed.iter().filter_map(|c| c[k].as_ref().map(|v| v.0)).collect();
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        discrepancy = discrepancy.max(hi - lo);
    }

    // The cutoff must drop a chart by more than the gluing width plus the
    // overlap discrepancy before it leaves its domain; factor 2 of headroom.
    let gluing_eps = cfg.gluing_ratio * eps;
    let b = 2.0 * (discrepancy + 2.0 * gluing_eps) / (eps * cfg.c_cut);
    let c2 = cfg.cover.patches.iter().map(eta_curvature).fold(0.0, f64::max) * cfg.c_cut;
    let lambda = c2 * b * eps;
    let spec = SmoothMaxSpec::new(gluing_eps)?;

    let mut values = Vec::with_capacity(nodes.len());
    let mut args: Vec<f64> = Vec::with_capacity(cfg.cover.patches.len());
    for k in 0..nodes.len() {
        args.clear();
        for (p, col) in cfg.cover.patches.iter().zip(&smoothed) {
            if let Some((v, xl)) = &col[k] {
                args.push(v + b * eps * cfg.c_cut * eta(p, xl));
            }
        }
        values.push(smooth_max(&args, &spec) / (1.0 + lambda));
    }
    let out = GridFunction::new(dim, m, values)?;
    let check = check_gconvex(&out, 1e-6);
    if !check.pass {
        return Err(Error::PostCheckFailed { worst: check.worst });
    }
    let report = RegularizationReport {
        eps,
        gluing_eps,
        discrepancy,
        b,
        c2,
        c_cut: cfg.c_cut,
        lambda,
        post_check_worst: check.worst,
    };
    Ok((out, report))
}
