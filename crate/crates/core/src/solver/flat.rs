use alloc::vec::Vec;

use super::{solve_twisted_from, AtomicMeasure, SolveConfig, SolveMethod};
use crate::envelope::EnvelopeFunction;
use crate::error::{Error, Result};
use crate::gconvex::normalize_sup_envelope;
use crate::geometry::ScalarDensity;
use crate::ma_measure::ma_atomic;
use crate::math::{self, exp};

#[derive(Clone, Debug, PartialEq)]
pub struct FlatPathConfig {
    /// Strictly decreasing exponents ending at `ε_min > 0`.
    pub schedule: Vec<f64>,
    pub step: SolveConfig,
    /// Largest acceptable spread of the per-atom estimates of `c`.
    pub spread_threshold: f64,
}

impl FlatPathConfig {
    /// `ε_k = ratio^k` from 1 down to `eps_min`; the last step is clamped to
    /// `eps_min`.
    pub fn geometric(ratio: f64, eps_min: f64) -> Result<Self> {
        if eps_min == 0.0 {
            return Err(Error::UnanchoredProblem);
        }
        if !(eps_min > 0.0 && eps_min <= 1.0) || !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidInput("schedule needs 0 < ratio < 1 and 0 < eps_min <= 1".into()));
        }
        let mut schedule = Vec::new();
        let mut e = 1.0;
        while e > eps_min * (1.0 + 1e-12) {
            schedule.push(e);
            e *= ratio;
        }
        schedule.push(eps_min);
        Ok(FlatPathConfig {
            schedule,
            step: SolveConfig { method: SolveMethod::Newton, max_iter: 100, ..SolveConfig::default() },
            spread_threshold: 1e-2,
        })
    }

    fn validate(&self) -> Result<()> {
        match self.schedule.last() {
            None => Err(Error::InvalidInput("empty schedule".into())),
            Some(e) if *e <= 0.0 => Err(Error::UnanchoredProblem),
            _ if self.schedule.windows(2).any(|w| w[1] >= w[0]) => {
                Err(Error::InvalidInput("schedule must be strictly decreasing".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatStep {
    pub eps: f64,
    pub iterations: usize,
    pub residual: f64,
    pub c: f64,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct FlatReport {
    /// Geometric mean of the per-atom estimates at the last solved step.
    pub c: f64,
    /// `e^{ε s_i}` at the last solved step.
    pub per_atom_c: Vec<f64>,
    pub spread: f64,
    pub spread_ok: bool,
    /// Sup-normalized solution.
    pub solution: EnvelopeFunction,
    /// `max_i |H_i - c μ_i| / (c μ_i)` for the normalized solution.
    pub mass_residual: f64,
    pub steps: Vec<FlatStep>,
    /// Every step of the schedule converged.
    pub converged: bool,
}

/// Flat equation `M_ρ[u] = c μ` through the twisted problems with exponents
/// along the schedule, each warm-started from the previous one.
pub fn solve_flat(mu: &AtomicMeasure, rho: &ScalarDensity, path: &FlatPathConfig) -> Result<FlatReport> {
    path.validate()?;
    let mut steps = Vec::with_capacity(path.schedule.len());
    let mut last: Option<(f64, EnvelopeFunction)> = None;
    let mut converged = true;
    for &eps in &path.schedule {
        // Keep ε·mean(s) (the log of c) fixed and the differences of s.
        let init: Option<Vec<f64>> = last.as_ref().map(|(e_prev, f)| {
            let s = f.values();
            let m = s.iter().sum::<f64>() / s.len() as f64;
            s.iter().map(|v| v - m + m * e_prev / eps).collect()
        });
        let (f, report) = solve_twisted_from(mu, rho, eps, &path.step, init.as_deref())?;
        let c = exp(eps * f.values().iter().sum::<f64>() / f.len() as f64);
        steps.push(FlatStep {
            eps,
            iterations: report.iterations,
            residual: report.max_residual(),
            c,
            converged: report.converged,
        });
        if !report.converged {
            converged = false;
            if last.is_none() {
                last = Some((eps, f));
            }
            break;
        }
        last = Some((eps, f));
    }
    let (eps, f) = last.expect("schedule is nonempty");
    let per_atom_c: Vec<f64> = f.values().iter().map(|s| exp(eps * s)).collect();
    let c = exp(eps * f.values().iter().sum::<f64>() / f.len() as f64);
    let spread = per_atom_c.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - per_atom_c.iter().cloned().fold(f64::INFINITY, f64::min);
    let solution = normalize_sup_envelope(&f)?;
    let h = ma_atomic(&solution, rho)?.masses;
    let mass_residual = h
        .iter()
        .zip(mu.weights())
        .map(|(h, w)| math::abs(h - c * w) / (c * w))
        .fold(0.0, f64::max);
    Ok(FlatReport {
        c,
        per_atom_c,
        spread,
        spread_ok: spread <= path.spread_threshold,
        solution,
        mass_residual,
        steps,
        converged,
    })
}
