//! Solvers for the twisted equation `M_ρ[u] = e^{εu} μ`, general measures by
//! quantization, and the flat equation `M_ρ[u] = c μ` along `ε ↓ 0`.
//!
//! The unknown is the vector of envelope values `s_i` at the atoms of `μ`;
//! the solution is the envelope function of those values. This is a discrete
//! Perron method: the envelope of point constraints plays the role of the
//! envelope of subsolutions, and each value update is a pointwise balayage
//! with exact atomic masses in place of local Dirichlet solves.

mod flat;
mod general;
mod measure;
mod twisted;

pub use flat::{solve_flat, FlatPathConfig, FlatReport, FlatStep};
pub use general::{solve_general, GeneralReport, GeneralStep};
pub use measure::{quantize_measure, AtomicMeasure, DensitySpec};
pub use twisted::{
    mass_jacobian_fd, solve_newton, solve_twisted, solve_twisted_from, MassJacobian, SolveConfig, SolveMethod,
    SolveReport,
};
