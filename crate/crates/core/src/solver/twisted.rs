use alloc::vec::Vec;

use super::AtomicMeasure;
use crate::envelope::{EnvelopeFunction, DEFAULT_TRUNCATION};
use crate::error::{Error, Result};
use crate::geometry::ScalarDensity;
use crate::ma_measure::ma_atomic;
use crate::math::{self, exp, ln};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    /// Damped per-site Newton (Jacobi) value iteration with lift-off repair.
    Damped,
    /// Full Newton with a finite-difference Jacobian and a line search.
    Newton,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveConfig {
    /// Bound on `max_i |log H_i - log c_i - ε s_i|`.
    pub tol: f64,
    pub tau: f64,
    pub max_iter: usize,
    pub truncation: usize,
    pub liftoff_step: f64,
    pub method: SolveMethod,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tol: 1e-11,
            tau: 0.5,
            max_iter: 10_000,
            truncation: DEFAULT_TRUNCATION,
            liftoff_step: 1.0,
            method: SolveMethod::Damped,
        }
    }
}

impl SolveConfig {
    pub fn newton() -> Self {
        SolveConfig { method: SolveMethod::Newton, max_iter: 100, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.tau > 0.0 && self.tau <= 1.0) || !(self.liftoff_step > 0.0) {
            return Err(Error::InvalidInput("solver needs tol > 0, 0 < tau <= 1 and a positive liftoff step".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub values: Vec<f64>,
    /// `log H_i - log c_i - ε s_i`, recomputed from a fresh hull.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    /// Sup-norm residual per iteration.
    pub history: Vec<f64>,
    pub converged: bool,
    pub method: SolveMethod,
    pub eps_exp: f64,
}

impl SolveReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| math::abs(*r)).fold(0.0, f64::max)
    }

    /// `Err(MaxIterExceeded)` unless the run converged.
    pub fn check(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::MaxIterExceeded { iterations: self.iterations, residual: self.max_residual() })
        }
    }
}

fn validate_problem(mu: &AtomicMeasure, rho: &ScalarDensity, eps: f64) -> Result<()> {
    if eps == 0.0 {
        return Err(Error::UnanchoredProblem);
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidInput(alloc::format!("exponent {eps} outside (0, 1]")));
    }
    if let Some(d) = rho.dim() {
        if d != mu.dim() {
            return Err(Error::DimensionMismatch { expected: mu.dim(), found: d });
        }
    }
    Ok(())
}

fn masses(f: &EnvelopeFunction, rho: &ScalarDensity) -> Result<Vec<f64>> {
    Ok(ma_atomic(f, rho)?.masses)
}

/// Shift all values so that `Σ c_i e^{ε s_i} = Σ H_i`. Masses only see
/// differences of values, so this fixes the one mode the per-site updates
/// cannot see.
fn balance(s: &mut [f64], h: &[f64], c: &[f64], eps: f64) {
    let lhs: f64 = h.iter().sum();
    // log Σ c e^{εs}, stabilized.
    let top = s.iter().zip(c).map(|(s, c)| eps * s + ln(*c)).fold(f64::NEG_INFINITY, f64::max);
    let rhs = top + ln(s.iter().zip(c).map(|(s, c)| exp(eps * s + ln(*c) - top)).sum::<f64>());
    let t = (ln(lhs) - rhs) / eps;
    for v in s.iter_mut() {
        *v += t;
    }
}

fn log_residuals(h: &[f64], c: &[f64], s: &[f64], eps: f64) -> Vec<f64> {
    h.iter().zip(c).zip(s).map(|((h, c), s)| ln(*h) - ln(*c) - eps * s).collect()
}

fn sup(r: &[f64]) -> f64 {
    r.iter().map(|x| math::abs(*x)).fold(0.0, f64::max)
}

/// Solve `M_ρ[u] = e^{εu} μ` for atomic `μ`; `u` is the envelope of the
/// returned values. Dispatches on `cfg.method`.
pub fn solve_twisted(
    mu: &AtomicMeasure,
    rho: &ScalarDensity,
    eps: f64,
    cfg: &SolveConfig,
) -> Result<(EnvelopeFunction, SolveReport)> {
    solve_twisted_from(mu, rho, eps, cfg, None)
}

/// [`solve_twisted`] from an initial guess for the values.
pub fn solve_twisted_from(
    mu: &AtomicMeasure,
    rho: &ScalarDensity,
    eps: f64,
    cfg: &SolveConfig,
    init: Option<&[f64]>,
) -> Result<(EnvelopeFunction, SolveReport)> {
    validate_problem(mu, rho, eps)?;
    cfg.validate()?;
    let n = mu.len();
    let s0 = match init {
        Some(v) if v.len() == n => v.to_vec(),
        Some(v) => return Err(Error::InvalidInput(alloc::format!("initial guess has {} values for {n} atoms", v.len()))),
        None => alloc::vec![0.0; n],
    };
    let f = EnvelopeFunction::new(mu.sites().to_vec(), s0, cfg.truncation)?;
    let (f, iterations, history) = match cfg.method {
        SolveMethod::Damped => damped(f, mu, rho, eps, cfg)?,
        SolveMethod::Newton => newton(f, mu, rho, eps, cfg)?,
    };
    // Certificate from an independent mass evaluation.
    let h = masses(&f, rho)?;
    let residuals = if h.iter().all(|h| *h > 0.0) {
        log_residuals(&h, mu.weights(), f.values(), eps)
    } else {
        alloc::vec![f64::INFINITY; n]
    };
    let converged = sup(&residuals) <= cfg.tol;
    let report = SolveReport {
        values: f.values().to_vec(),
        residuals,
        iterations,
        history,
        converged,
        method: cfg.method,
        eps_exp: eps,
    };
    Ok((f, report))
}

/// Newton solve; shorthand for `solve_twisted` with `SolveMethod::Newton`.
pub fn solve_newton(
    mu: &AtomicMeasure,
    rho: &ScalarDensity,
    eps: f64,
    cfg: &SolveConfig,
) -> Result<(EnvelopeFunction, SolveReport)> {
    solve_twisted(mu, rho, eps, &SolveConfig { method: SolveMethod::Newton, ..*cfg })
}

fn damped(
    mut f: EnvelopeFunction,
    mu: &AtomicMeasure,
    rho: &ScalarDensity,
    eps: f64,
    cfg: &SolveConfig,
) -> Result<(EnvelopeFunction, usize, Vec<f64>)> {
    let c = mu.weights();
    let mut s = f.values().to_vec();
    let mut history = Vec::new();
    for it in 0..cfg.max_iter {
        let h = masses(&f, rho)?;
        if h.iter().any(|h| *h <= 0.0) {
            for (v, h) in s.iter_mut().zip(&h) {
                if *h <= 0.0 {
                    *v -= cfg.liftoff_step;
                }
            }
            history.push(f64::INFINITY);
            f = f.with_values(s.clone());
            continue;
        }
        balance(&mut s, &h, c, eps);
        f = f.with_values(s.clone());
        let r = log_residuals(&h, c, &s, eps);
        history.push(sup(&r));
        if sup(&r) <= cfg.tol {
            return Ok((f, it, history));
        }
        // d_i = -∂ log H_i / ∂ s_i by a one-site difference.
        let step = 1e-7;
        let mut next = s.clone();
        for i in 0..s.len() {
            let mut probe = f.clone();
            probe.set_value(i, s[i] + step);
            let up = probe.cell(i)?.volume * rho.eval(&f.sites()[i]);
            let d = if up > 0.0 {
                -(ln(up) - ln(h[i])) / step
            } else {
                probe.set_value(i, s[i] - step);
                let down = probe.cell(i)?.volume * rho.eval(&f.sites()[i]);
                -(ln(h[i]) - ln(down)) / step
            };
            next[i] = s[i] + cfg.tau * r[i] / (eps + d.max(0.0));
        }
        s = next;
        f = f.with_values(s.clone());
    }
    Ok((f, cfg.max_iter, history))
}

/// Finite-difference Jacobian `∂H_i/∂s_j`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct MassJacobian {
    pub n: usize,
    pub matrix: Vec<f64>,
    /// Some column fell back to a one-sided difference because a site lifted
    /// off on one side.
    pub one_sided: bool,
}

impl MassJacobian {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n + j]
    }

    pub fn max_row_sum(&self) -> f64 {
        (0..self.n)
            .map(|i| math::abs((0..self.n).map(|j| self.get(i, j)).sum::<f64>()))
            .fold(0.0, f64::max)
    }
}

/// Central-difference Jacobian of the atomic masses in the values.
pub fn mass_jacobian_fd(f: &EnvelopeFunction, rho: &ScalarDensity, step: f64) -> Result<MassJacobian> {
    if !(step > 0.0) {
        return Err(Error::InvalidInput("difference step must be positive".into()));
    }
    let n = f.len();
    let base = masses(f, rho)?;
    let active = |h: &[f64]| h.iter().zip(&base).all(|(a, b)| (*a > 0.0) == (*b > 0.0));
    let mut matrix = alloc::vec![0.0; n * n];
    let mut one_sided = false;
    for j in 0..n {
        let mut up = f.clone();
        up.set_value(j, f.values()[j] + step);
        let mut down = f.clone();
        down.set_value(j, f.values()[j] - step);
        let hu = masses(&up, rho)?;
        let hd = masses(&down, rho)?;
        let col: Vec<f64> = match (active(&hu), active(&hd)) {
            (true, true) => hu.iter().zip(&hd).map(|(a, b)| (a - b) / (2.0 * step)).collect(),
            (true, false) => {
                one_sided = true;
                hu.iter().zip(&base).map(|(a, b)| (a - b) / step).collect()
            }
            (false, true) => {
                one_sided = true;
                base.iter().zip(&hd).map(|(a, b)| (a - b) / step).collect()
            }
            (false, false) => return Err(Error::SingularJacobian),
        };
        for i in 0..n {
            matrix[i * n + j] = col[i];
        }
    }
    Ok(MassJacobian { n, matrix, one_sided })
}

fn newton(
    mut f: EnvelopeFunction,
    mu: &AtomicMeasure,
    rho: &ScalarDensity,
    eps: f64,
    cfg: &SolveConfig,
) -> Result<(EnvelopeFunction, usize, Vec<f64>)> {
    let c = mu.weights();
    let n = mu.len();
    let mut s = f.values().to_vec();
    let mut h = masses(&f, rho)?;
    if h.iter().any(|h| *h <= 0.0) {
        return Err(Error::InvalidInput("Newton needs an initial guess with every site active".into()));
    }
    balance(&mut s, &h, c, eps);
    f = f.with_values(s.clone());
    let mut history = Vec::new();
    let residual = |h: &[f64], s: &[f64]| -> Vec<f64> {
        h.iter().zip(c).zip(s).map(|((h, c), s)| h - c * exp(eps * s)).collect()
    };
    for it in 0..cfg.max_iter {
        let lr = log_residuals(&h, c, &s, eps);
        history.push(sup(&lr));
        if sup(&lr) <= cfg.tol {
            return Ok((f, it, history));
        }
        let r = residual(&h, &s);
        let jac = mass_jacobian_fd(&f, rho, 1e-6)?;
        let mut a = jac.matrix;
        for i in 0..n {
            a[i * n + i] -= eps * c[i] * exp(eps * s[i]);
        }
        let mut delta: Vec<f64> = r.iter().map(|x| -x).collect();
        math::lu_solve(&mut a, n, &mut delta)?;
        let norm0 = sup(&r);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = s.iter().zip(&delta).map(|(s, d)| s + alpha * d).collect();
            let ft = f.with_values(trial.clone());
            let ht = masses(&ft, rho)?;
            if ht.iter().all(|h| *h > 0.0) && sup(&residual(&ht, &trial)) < norm0 {
                s = trial;
                f = ft;
                h = ht;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Ok((f, it, history));
        }
    }
    Ok((f, cfg.max_iter, history))
}
