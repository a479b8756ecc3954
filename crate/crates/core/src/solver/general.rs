use alloc::vec::Vec;

use super::{quantize_measure, solve_twisted, AtomicMeasure, DensitySpec, SolveConfig, SolveReport};
use crate::envelope::EnvelopeFunction;
use crate::error::{Error, Result};
use crate::gconvex::GridFunction;
use crate::geometry::ScalarDensity;
use crate::math;

#[derive(Clone, Debug)]
pub struct GeneralStep {
    pub atoms: usize,
    pub measure: AtomicMeasure,
    pub solution: EnvelopeFunction,
    pub report: SolveReport,
    /// `sup |u_p|` on the evaluation grid.
    pub sup_abs: f64,
    /// `‖u_p - u_{p_prev}‖_∞` on the evaluation grid.
    pub delta_prev: Option<f64>,
    pub samples: GridFunction,
}

#[derive(Clone, Debug)]
pub struct GeneralReport {
    pub steps: Vec<GeneralStep>,
    /// `sup |u_p|` and the consecutive distances are both nonincreasing.
    pub monotone: bool,
}

/// Quantize `spec` at each atom count of the schedule, solve the twisted
/// equation, and track how the solutions settle.
pub fn solve_general(
    spec: &DensitySpec,
    dim: usize,
    schedule: &[usize],
    rho: &ScalarDensity,
    eps: f64,
    cfg: &SolveConfig,
) -> Result<GeneralReport> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("atom schedule must be nonempty and increasing".into()));
    }
    let grid = if dim == 1 { 512 } else { 64 };
    let mut steps: Vec<GeneralStep> = Vec::with_capacity(schedule.len());
    for &p in schedule {
        let measure = quantize_measure(spec, dim, p)?;
        let (solution, report) = solve_twisted(&measure, rho, eps, cfg)?;
        report.check()?;
        let samples = GridFunction::sample(&solution.hull()?, grid)?;
        let sup_abs = samples.values().iter().map(|v| math::abs(*v)).fold(0.0, f64::max);
        let delta_prev = match steps.last() {
            Some(prev) => Some(samples.sup_distance(&prev.samples)?),
            None => None,
        };
        steps.push(GeneralStep { atoms: p, measure, solution, report, sup_abs, delta_prev, samples });
    }
    let sups_ok = steps.windows(2).all(|w| w[1].sup_abs <= w[0].sup_abs + 1e-15);
    let deltas: Vec<f64> = steps.iter().filter_map(|s| s.delta_prev).collect();
    let deltas_ok = deltas.windows(2).all(|w| w[1] <= w[0] + 1e-15);
    Ok(GeneralReport { steps, monotone: sups_ok && deltas_ok })
}
