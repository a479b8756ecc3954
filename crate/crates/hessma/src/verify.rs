//! Verification suites. Every property runs a batch of generated or fixed
//! cases and reduces them to a pass flag and a margin (the slack of the
//! worst case; negative means a violation).

use std::time::Instant;

use hessma_core::comparison::{assert_global_comparison, dominates_twisted, local_comparison_harness, LocalComparison};
use hessma_core::gconvex::{
    lipschitz_and_bounds, mollify_global, normalize_sup_envelope, regularize_charts, CompactnessConstants,
    MollifierSpec, RegularizationConfig,
};
use hessma_core::geometry::CosineTerm;
use hessma_core::ma_measure::chart::ChartGrid;
use hessma_core::ma_measure::{
    check_mass_comparison, check_max_inequality, check_superadditivity, ma_atomic, ma_oracle_smooth, MassBounds,
    SlopeOracleConfig,
};
use hessma_core::solver::{solve_twisted, AtomicMeasure};
use hessma_core::{EnvelopeFunction, GridFunction, Partition, PartitionMeasure, Point, ScalarDensity, SolveConfig};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::parallel::slopes_parallel;

pub const DEFAULT_SEED: u64 = 20_240_611;
pub const DEFAULT_SAMPLES: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Compactness,
    Comparison,
    MeasureLemmas,
    Oracles,
    All,
}

impl Suite {
    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Compactness, Suite::Comparison, Suite::MeasureLemmas, Suite::Oracles],
            s => vec![s],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Suite::Compactness => "compactness",
            Suite::Comparison => "comparison",
            Suite::MeasureLemmas => "measure-lemmas",
            Suite::Oracles => "oracles",
            Suite::All => "all",
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub dims: Vec<usize>,
    /// Slope samples per oracle run.
    pub samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: DEFAULT_SEED, dims: vec![1, 2], samples: DEFAULT_SAMPLES }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyResult {
    pub suite: String,
    pub name: String,
    pub dim: usize,
    pub cases: usize,
    pub passed: usize,
    pub pass: bool,
    /// Slack of the worst case; `null` when a case raised an error.
    pub margin: f64,
    pub detail: String,
    /// Wall time, kept out of the report file so that it stays reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub dims: Vec<usize>,
    pub samples: usize,
    pub pass: bool,
    pub properties: Vec<PropertyResult>,
}

/// Outcome of one case: its margin and a description used when it is the
/// worst case.
type Case = (f64, String);

fn tally(suite: Suite, name: &str, dim: usize, cases: Vec<Case>, started: Instant) -> PropertyResult {
    let passed = cases.iter().filter(|(m, _)| *m >= 0.0).count();
    let (margin, detail) = cases
        .iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .cloned()
        .unwrap_or((f64::NEG_INFINITY, "no cases".into()));
    PropertyResult {
        suite: suite.name().into(),
        name: name.into(),
        dim,
        cases: cases.len(),
        passed,
        pass: !cases.is_empty() && passed == cases.len(),
        margin,
        detail,
        seconds: started.elapsed().as_secs_f64(),
    }
}

fn failed(e: impl std::fmt::Display) -> Case {
    (f64::NEG_INFINITY, format!("error: {e}"))
}

/// Property-local random stream: the same seed reproduces a property
/// whichever other properties run.
struct Gen(ChaCha8Rng);

impl Gen {
    fn new(seed: u64, stream: u64) -> Self {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(stream);
        Gen(r)
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn int(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.0.next_u64() % (hi - lo + 1) as u64) as usize
    }

    fn point(&mut self, dim: usize) -> Point {
        let c: Vec<f64> = (0..dim).map(|_| self.uniform(-0.5, 0.5)).collect();
        Point::new(&c)
    }

    /// Sites at pairwise torus distance at least `sep`.
    fn sites(&mut self, dim: usize, n: usize, sep: f64) -> Vec<Point> {
        let mut out: Vec<Point> = Vec::with_capacity(n);
        while out.len() < n {
            let p = self.point(dim);
            if out.iter().all(|q| torus_dist(&p, q) >= sep) {
                out.push(p);
            }
        }
        out
    }

    fn envelope(&mut self, dim: usize) -> EnvelopeFunction {
        let n = if dim == 1 { self.int(1, 8) } else { self.int(1, 6) };
        let sites = self.sites(dim, n, 0.05);
        let values = (0..n).map(|_| self.uniform(-0.05, 0.05)).collect();
        EnvelopeFunction::with_default_truncation(sites, values).expect("generated sites are distinct")
    }

    fn measure(&mut self, dim: usize) -> AtomicMeasure {
        let n = if dim == 1 { self.int(1, 6) } else { self.int(1, 4) };
        let sites = self.sites(dim, n, 0.08);
        let w: Vec<f64> = (0..n).map(|_| self.uniform(0.2, 1.0)).collect();
        AtomicMeasure::normalized(sites, w).expect("positive weights")
    }

    /// Symmetric positive definite matrix (row major) with eigenvalues in
    /// `[lo, hi]`.
    fn spd(&mut self, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
        if dim == 1 {
            return vec![self.uniform(lo, hi)];
        }
        let t = self.uniform(0.0, std::f64::consts::PI);
        let (c, s) = (t.cos(), t.sin());
        let (l1, l2) = (self.uniform(lo, hi), self.uniform(lo, hi));
        vec![c * c * l1 + s * s * l2, c * s * (l1 - l2), c * s * (l1 - l2), s * s * l1 + c * c * l2]
    }
}

fn torus_dist(p: &Point, q: &Point) -> f64 {
    (0..p.dim())
        .map(|a| {
            let d = (p[a] - q[a]).rem_euclid(1.0);
            d.min(1.0 - d)
        })
        .fold(0.0, f64::max)
}

fn quad(a: &[f64], x: &Point) -> f64 {
    if x.dim() == 1 {
        0.5 * a[0] * x[0] * x[0]
    } else {
        0.5 * (a[0] * x[0] * x[0] + 2.0 * a[1] * x[0] * x[1] + a[3] * x[1] * x[1])
    }
}

fn det(a: &[f64]) -> f64 {
    if a.len() == 1 {
        a[0]
    } else {
        a[0] * a[3] - a[1] * a[2]
    }
}

/// The non-constant density used by the suites.
pub fn test_density(dim: usize) -> ScalarDensity {
    let terms = if dim == 1 {
        vec![CosineTerm { freq: vec![1], amp: 0.5 }]
    } else {
        vec![CosineTerm { freq: vec![1, 0], amp: 0.3 }, CosineTerm { freq: vec![1, 1], amp: 0.2 }]
    };
    ScalarDensity::cosine(1.0, terms).expect("positive density")
}

fn eval_grid(dim: usize) -> usize {
    if dim == 1 {
        512
    } else {
        64
    }
}

pub fn run(suite: Suite, opts: &VerifyOptions) -> VerifyReport {
    let mut properties = Vec::new();
    for s in suite.members() {
        for &dim in &opts.dims {
            properties.extend(match s {
                Suite::Compactness => compactness(dim, opts),
                Suite::Comparison => comparison(dim, opts),
                Suite::MeasureLemmas => measure_lemmas(dim, opts),
                Suite::Oracles => oracles(dim, opts),
                Suite::All => unreachable!(),
            });
        }
    }
    VerifyReport {
        suite,
        seed: opts.seed,
        dims: opts.dims.clone(),
        samples: opts.samples,
        pass: properties.iter().all(|p| p.pass),
        properties,
    }
}

// Compactness: sup-normalized functions satisfy `u ≥ -C₀` and have grid
// Lipschitz constant at most `C₁`.

fn k0_margin(f: &EnvelopeFunction) -> Case {
    let dim = f.dim();
    let k = CompactnessConstants::torus(dim);
    let run = || -> hessma_core::Result<Case> {
        let g = GridFunction::sample(&normalize_sup_envelope(f)?.hull()?, eval_grid(dim))?;
        let st = lipschitz_and_bounds(&g);
        let margin = (st.inf + k.c0 + 1e-9).min(k.c1 + 1e-9 - st.lip).min(1e-9 - st.sup);
        Ok((margin, format!("inf {:.6}, lip {:.6}, sup {:.2e}", st.inf, st.lip, st.sup)))
    };
    run().unwrap_or_else(failed)
}

fn compactness(dim: usize, opts: &VerifyOptions) -> Vec<PropertyResult> {
    let t = Instant::now();
    let mut g = Gen::new(opts.seed, 100 + dim as u64);
    let fs: Vec<EnvelopeFunction> = (0..100).map(|_| g.envelope(dim)).collect();
    let cases = fs.par_iter().map(k0_margin).collect();
    let random = tally(Suite::Compactness, "normalized_envelopes_in_k0", dim, cases, t);

    let t = Instant::now();
    let mut g = Gen::new(opts.seed, 110 + dim as u64);
    let mus: Vec<AtomicMeasure> = (0..10).map(|_| g.measure(dim)).collect();
    let rho = test_density(dim);
    let cases = mus
        .par_iter()
        .map(|mu| match solve_twisted(mu, &rho, 1.0, &SolveConfig::newton()) {
            Ok((f, r)) if r.converged => k0_margin(&f),
            Ok((_, r)) => failed(format!("solver residual {:e}", r.max_residual())),
            Err(e) => failed(e),
        })
        .collect();
    let solved = tally(Suite::Compactness, "normalized_solutions_in_k0", dim, cases, t);
    vec![random, solved]
}

// Comparison principle.

fn comparison(dim: usize, opts: &VerifyOptions) -> Vec<PropertyResult> {
    let m = if dim == 1 { 512 } else { 128 };
    let rho = test_density(dim);
    let cfg = SolveConfig::newton();

    let t = Instant::now();
    let mut g = Gen::new(opts.seed, 200 + dim as u64);
    let pairs: Vec<(AtomicMeasure, Vec<f64>)> = (0..50)
        .map(|_| {
            let mu = g.measure(dim);
            let theta = (0..mu.len()).map(|_| g.uniform(0.3, 1.0).max(0.3 + 1e-9)).collect();
            (mu, theta)
        })
        .collect();
    let cases = pairs
        .par_iter()
        .map(|(mu, theta)| comparison_case(mu, &mu.reweighted(theta).expect("positive factors"), &rho, &cfg, m))
        .collect();
    let dominated = tally(Suite::Comparison, "dominated_pairs", dim, cases, t);

    let t = Instant::now();
    let mut g = Gen::new(opts.seed, 210 + dim as u64);
    let mus: Vec<AtomicMeasure> = (0..10).map(|_| g.measure(dim)).collect();
    let cases = mus
        .par_iter()
        .map(|mu| {
            let twice = mu.reweighted(&vec![2.0; mu.len()]).expect("positive factors");
            comparison_case(&twice, mu, &rho, &cfg, m)
        })
        .collect();
    let scaled = tally(Suite::Comparison, "rescaled_measure_pairs", dim, cases, t);

    let t = Instant::now();
    let mut g = Gen::new(opts.seed, 220 + dim as u64);
    let specs: Vec<(Vec<f64>, f64, Point)> = (0..20)
        .map(|_| (g.spd(dim, 1.0, 3.0), g.uniform(0.05, 0.4), g.point(dim) * 0.8))
        .collect();
    let cases = specs.par_iter().map(|(a, kappa, x0)| local_case(a, *kappa, x0)).collect();
    let local = tally(Suite::Comparison, "local_comparison", dim, cases, t);
    vec![dominated, scaled, local]
}

/// Solve for `big` and `small` (`big ≥ small` atomwise) and check that the
/// solution for `big` lies below the one for `small`.
fn comparison_case(big: &AtomicMeasure, small: &AtomicMeasure, rho: &ScalarDensity, cfg: &SolveConfig, m: usize) -> Case {
    let run = || -> hessma_core::Result<Case> {
        let (u, ru) = solve_twisted(big, rho, 1.0, cfg)?;
        let (v, rv) = solve_twisted(small, rho, 1.0, cfg)?;
        ru.check()?;
        rv.check()?;
        let (hu, hv) = (u.hull()?, v.hull()?);
        let dom = dominates_twisted(&hu, &ma_atomic(&u, rho)?, &hv, &ma_atomic(&v, rho)?, 1e-8)?;
        if !dom.dominated {
            return Ok((dom.worst_margin, "solver pair is not dominated".into()));
        }
        let cmp = assert_global_comparison(&hu, &hv, &dom, m, 1e-8)?;
        Ok((1e-8 - cmp.max_gap, format!("max(u - v) = {:.3e}", cmp.max_gap)))
    };
    run().unwrap_or_else(failed)
}

/// `v = ½xᵀAx`, `u = v - κ|x - x₀|² + c` with `c` just small enough for
/// `e^{-u} M[u] ≥ e^{-v} M[v]`; the harness must find `u ≤ v` at the
/// interior maximum of `u - v`.
fn local_case(a: &[f64], kappa: f64, x0: &Point) -> Case {
    let dim = x0.dim();
    let (m, slopes) = if dim == 1 { (201, 2000) } else { (25, 100) };
    let shifted: Vec<f64> = if dim == 1 { vec![a[0] - 2.0 * kappa] } else { vec![a[0] - 2.0 * kappa, a[1], a[2], a[3] - 2.0 * kappa] };
    let c = -(det(a) / det(&shifted)).ln() - 0.05;
    let run = || -> hessma_core::Result<Case> {
        let v = ChartGrid::from_fn(dim, -1.0, 1.0, m, |x| quad(a, x))?;
        let u = ChartGrid::from_fn(dim, -1.0, 1.0, m, |x| {
            let d = *x - *x0;
            quad(a, x) - kappa * d.norm2() + c
        })?;
        Ok(match local_comparison_harness(&u, &v, 4, slopes, 0.05)? {
            LocalComparison::Passed { gap, .. } => (-gap, format!("u - v = {gap:.4} at the interior maximum")),
            LocalComparison::Failed { gap, .. } => (-gap, format!("u - v = {gap:.4} > 0")),
            LocalComparison::Skipped(why) => (-1.0, format!("skipped: {why}")),
        })
    };
    run().unwrap_or_else(failed)
}

// Measure lemmas.

fn measure_lemmas(dim: usize, opts: &VerifyOptions) -> Vec<PropertyResult> {
    let tiling_tol = if dim == 1 { 1e-12 } else { 1e-6 };
    let rho = test_density(dim);

    let t = Instant::now();
    let mut g = Gen::new(opts.seed, 300 + dim as u64);
    let fs: Vec<EnvelopeFunction> = (0..100).map(|_| g.envelope(dim)).collect();
    let cases = fs
        .par_iter()
        .map(|f| match ma_atomic(f, &ScalarDensity::uniform()) {
            Ok(r) => {
                let err = (r.volumes.iter().sum::<f64>() - 1.0).abs();
                (tiling_tol - err, format!("|Σ vol - 1| = {err:.3e}"))
            }
            Err(e) => failed(e),
        })
        .collect();
    let tiling = tally(Suite::MeasureLemmas, "cells_tile_unit_volume", dim, cases, t);

    let t = Instant::now();
    let bounds = MassBounds::for_density(&rho);
    let cases = fs
        .par_iter()
        .map(|f| match ma_atomic(f, &rho) {
            Ok(r) => ((r.total - bounds.a).min(bounds.b - r.total) + 1e-12, format!("total {:.6} in [{}, {}]", r.total, bounds.a, bounds.b)),
            Err(e) => failed(e),
        })
        .collect();
    let mass_bounds = tally(Suite::MeasureLemmas, "total_mass_within_density_bounds", dim, cases, t);

    let t = Instant::now();
    let mut g = Gen::new(opts.seed, 310 + dim as u64);
    let pairs: Vec<(EnvelopeFunction, EnvelopeFunction)> = (0..100)
        .map(|_| {
            let u = g.envelope(dim);
            // Equal values at some sites exercise the tie rule.
            let vals = u.values().iter().map(|s| if g.int(0, 2) == 0 { *s } else { s + g.uniform(-0.03, 0.03) }).collect();
            let v = u.with_values(vals);
            (u, v)
        })
        .collect();
    let cases = pairs
        .par_iter()
        .map(|(u, v)| match check_max_inequality(u, v, &rho, 1e-12) {
            Ok(r) => (r.worst_margin + 1e-12, format!("worst M[max] - M[selected] = {:.3e}", r.worst_margin)),
            Err(e) => failed(e),
        })
        .collect();
    let max_ineq = tally(Suite::MeasureLemmas, "max_inequality", dim, cases, t);

    let t = Instant::now();
    let mut g = Gen::new(opts.seed, 320 + dim as u64);
    let (m, n) = if dim == 1 { (401, 4000) } else { (25, 80) };
    let specs: Vec<_> = (0..50).map(|_| (convex_spec(&mut g, dim), convex_spec(&mut g, dim), region(&mut g, dim))).collect();
    let cases = specs
        .par_iter()
        .map(|(f, h, reg)| {
            let run = || -> hessma_core::Result<Case> {
                let f = ChartGrid::from_fn(dim, -1.0, 1.0, m, |x| f.eval(x))?;
                let h = ChartGrid::from_fn(dim, -1.0, 1.0, m, |x| h.eval(x))?;
                let r = check_superadditivity(&f, &h, reg, n, 0.0)?;
                let tol = 0.03 * r.rhs[0] + 1e-3;
                Ok((r.worst_margin + tol, format!("M[f+g] = {:.4}, M[f] + M[g] = {:.4}", r.lhs[0], r.rhs[0])))
            };
            run().unwrap_or_else(failed)
        })
        .collect();
    let superadd = tally(Suite::MeasureLemmas, "superadditivity", dim, cases, t);

    let t = Instant::now();
    let mut g = Gen::new(opts.seed, 330 + dim as u64);
    let specs: Vec<_> = (0..20).map(|_| (convex_spec(&mut g, dim), g.uniform(0.2, 1.0))).collect();
    let cases = specs
        .par_iter()
        .map(|(v, lambda)| {
            let run = || -> hessma_core::Result<Case> {
                let vg = ChartGrid::from_fn(dim, -1.0, 1.0, m, |x| v.eval(x))?;
                let ug = ChartGrid::from_fn(dim, -1.0, 1.0, m, |x| v.eval(x) + lambda * (x.norm_inf() - 1.0))?;
                let r = check_mass_comparison(&ug, &vg, n, 0.0)?;
                if !r.precondition_ok {
                    return Ok((-1.0, "u ≤ v with equal boundary values does not hold".into()));
                }
                let tol = 0.03 * r.rhs[0] + 1e-3;
                Ok((r.worst_margin + tol, format!("M[u] = {:.4}, M[v] = {:.4}", r.lhs[0], r.rhs[0])))
            };
            run().unwrap_or_else(failed)
        })
        .collect();
    let mass_cmp = tally(Suite::MeasureLemmas, "mass_comparison", dim, cases, t);
    vec![tiling, mass_bounds, max_ineq, superadd, mass_cmp]
}

/// Convex chart function `½xᵀAx + b·x + max_k (c_k·x + d_k)`.
struct ConvexSpec {
    a: Vec<f64>,
    b: Point,
    planes: Vec<(Point, f64)>,
}

impl ConvexSpec {
    fn eval(&self, x: &Point) -> f64 {
        let pl = self.planes.iter().map(|(c, d)| c.dot(x) + d).fold(f64::NEG_INFINITY, f64::max);
        quad(&self.a, x) + self.b.dot(x) + if self.planes.is_empty() { 0.0 } else { pl }
    }
}

fn convex_spec(g: &mut Gen, dim: usize) -> ConvexSpec {
    let a = g.spd(dim, 0.2, 2.0);
    let b = g.point(dim);
    let planes = (0..g.int(0, 3)).map(|_| (g.point(dim) * 0.8, g.uniform(-0.1, 0.1))).collect();
    ConvexSpec { a, b, planes }
}

fn region(g: &mut Gen, dim: usize) -> Option<(Point, Point)> {
    if g.int(0, 1) == 0 {
        return None;
    }
    let lo: Vec<f64> = (0..dim).map(|_| g.uniform(-0.9, 0.0)).collect();
    let hi: Vec<f64> = lo.iter().map(|l| l + g.uniform(0.4, 0.9)).collect();
    Some((Point::new(&lo), Point::new(&hi)))
}

// Oracles.

/// A fixed envelope function whose sites sit at bin centers of its
/// partition, so binned exact masses are exact for any density.
pub struct OracleFixture {
    pub name: &'static str,
    pub f: EnvelopeFunction,
    pub rho: ScalarDensity,
    pub partition: Partition,
    /// Resolution of the sampled function for the smooth oracle.
    pub grid: usize,
    pub delta: f64,
}

pub fn oracle_fixtures(dim: usize) -> Vec<OracleFixture> {
    let p = |c: &[f64]| Point::new(c);
    if dim == 1 {
        vec![
            OracleFixture {
                name: "two_sites",
                f: EnvelopeFunction::with_default_truncation(vec![p(&[0.0]), p(&[0.5])], vec![0.0, 0.0]).unwrap(),
                rho: ScalarDensity::uniform(),
                partition: Partition::with_offset(1, 4, 0.125).unwrap(),
                grid: 1024,
                delta: 0.02,
            },
            OracleFixture {
                name: "three_sites_cosine",
                f: EnvelopeFunction::with_default_truncation(
                    vec![p(&[-0.4375]), p(&[0.0625]), p(&[0.3125])],
                    vec![0.0, 0.01, -0.01],
                )
                .unwrap(),
                rho: test_density(1),
                partition: Partition::uniform(1, 8).unwrap(),
                grid: 1024,
                delta: 0.02,
            },
        ]
    } else {
        vec![OracleFixture {
            name: "three_sites_2d",
            f: EnvelopeFunction::with_default_truncation(
                vec![p(&[0.0, 0.0]), p(&[0.25, 0.5]), p(&[-0.25, 0.25])],
                vec![0.0, 0.0, 0.0],
            )
            .unwrap(),
            rho: ScalarDensity::uniform(),
            partition: Partition::with_offset(2, 4, 0.125).unwrap(),
            grid: 256,
            delta: 0.05,
        }]
    }
}

/// The three measures of a fixture on its partition.
pub struct OracleTriangle {
    pub exact: Vec<f64>,
    pub slopes: PartitionMeasure,
    pub smooth: PartitionMeasure,
}

impl OracleTriangle {
    /// Worst slack of the pairwise per-bin agreement within
    /// `max(3σ, 0.02)`, with σ the slope-sampling standard error.
    pub fn margin(&self) -> f64 {
        let mut worst = f64::INFINITY;
        for i in 0..self.exact.len() {
            let band = (3.0 * self.slopes.stderr[i]).max(0.02);
            let (e, s, m) = (self.exact[i], self.slopes.masses[i], self.smooth.masses[i]);
            worst = worst.min(band - (e - s).abs()).min(0.02 - (e - m).abs()).min(band - (s - m).abs());
        }
        worst
    }
}

pub fn oracle_triangle(fx: &OracleFixture, samples: usize, seed: u64) -> hessma_core::Result<OracleTriangle> {
    let exact = ma_atomic(&fx.f, &fx.rho)?;
    let exact = fx.partition.bin_atoms(&exact.sites, &exact.masses);
    let hull = fx.f.hull()?;
    let cfg = SlopeOracleConfig::new(samples, seed, fx.f.dim());
    let slopes = slopes_parallel(&hull, &fx.partition, &cfg)?.weighted_by(&fx.rho);
    let sampled = GridFunction::sample(&hull, fx.grid)?;
    let smooth = ma_oracle_smooth(&sampled, fx.delta, &fx.partition, &fx.rho)?;
    Ok(OracleTriangle { exact, slopes, smooth })
}

/// Measures of the two regularization paths of a 1D two-site envelope on
/// 16 bins, with the exact binned measure of the unregularized function.
pub struct RegularizedMeasures {
    pub exact: Vec<f64>,
    pub global: PartitionMeasure,
    pub charts: PartitionMeasure,
}

impl RegularizedMeasures {
    pub fn margin(&self) -> f64 {
        (0..self.exact.len())
            .map(|i| {
                let (e, g, c) = (self.exact[i], self.global.masses[i], self.charts.masses[i]);
                0.02 - (g - c).abs().max((e - g).abs()).max((e - c).abs())
            })
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn regularized_measures(eps: f64) -> hessma_core::Result<RegularizedMeasures> {
    let sites = vec![Point::new(&[1.0 / 32.0]), Point::new(&[17.0 / 32.0])];
    let f = EnvelopeFunction::with_default_truncation(sites, vec![0.0, 0.01])?;
    let rho = ScalarDensity::uniform();
    let partition = Partition::uniform(1, 16)?;
    let exact = ma_atomic(&f, &rho)?;
    let exact = partition.bin_atoms(&exact.sites, &exact.masses);
    let hull = f.hull()?;
    let cfg = RegularizationConfig::default_for(1)?;
    let (charts, _) = regularize_charts(&hull, eps, &cfg)?;
    let global = mollify_global(&GridFunction::sample(&hull, cfg.resolution)?, &MollifierSpec::new(eps)?)?;
    let delta = 4.0 / cfg.resolution as f64;
    Ok(RegularizedMeasures {
        exact,
        global: ma_oracle_smooth(&global, delta, &partition, &rho)?,
        charts: ma_oracle_smooth(&charts, delta, &partition, &rho)?,
    })
}

fn oracles(dim: usize, opts: &VerifyOptions) -> Vec<PropertyResult> {
    let t = Instant::now();
    let cases = oracle_fixtures(dim)
        .iter()
        .map(|fx| match oracle_triangle(fx, opts.samples, opts.seed) {
            Ok(tri) => (tri.margin(), format!("{}: exact {:?}, slopes {:?}, smooth {:?}", fx.name, round(&tri.exact), round(&tri.slopes.masses), round(&tri.smooth.masses))),
            Err(e) => failed(e),
        })
        .collect();
    let mut out = vec![tally(Suite::Oracles, "oracle_triangle", dim, cases, t)];
    if dim == 1 {
        let t = Instant::now();
        let case = match regularized_measures(1e-3) {
            Ok(r) => (r.margin(), format!("global {:?}, charts {:?}", round(&r.global.masses), round(&r.charts.masses))),
            Err(e) => failed(e),
        };
        out.push(tally(Suite::Oracles, "regularization_paths_measures", dim, vec![case], t));
    }
    out
}

fn round(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1e4).round() / 1e4).collect()
}
