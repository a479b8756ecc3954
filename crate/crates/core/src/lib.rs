//! Degenerate real Monge-Ampère equations on flat Hessian tori.
//!
//! The crate models the torus `R^n / Z^n` with the Hessian metric `g = ∇dφ`,
//! `φ(x) = |x|²/2`, and works with g-convex functions `u` (so that `φ + u` is
//! convex on the universal cover). Functions are carried either as
//! [`EnvelopeFunction`]s, the largest g-convex function below prescribed
//! values at a finite set of sites, or as sampled [`GridFunction`]s.
//!
//! The Monge-Ampère measure of an envelope function is atomic and is
//! computed exactly from the subdifferential cells of the lifted lower hull
//! ([`ma_measure::ma_atomic`]); two independent oracles (slope sampling and
//! mollified determinants) cross-check it. On top of that sit the solvers for
//! `M_ρ[u] = e^{εu} μ` and for the flat equation `M_ρ[u] = c μ`.
//!
//! The crate is `no_std` with `alloc`; file formats, the command line and
//! parallel drivers live in the `hessma` crate.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

mod error;
pub mod math;

pub mod comparison;
pub mod envelope;
pub mod gconvex;
pub mod geometry;
pub mod ma_measure;
pub mod solver;

pub use envelope::{EnvelopeFunction, LowerHull};
pub use error::{Error, Result};
pub use gconvex::{GridFunction, PeriodicFunction};
pub use geometry::{AffineChart, Point, ScalarDensity, TorusDomain, MAX_DIM};
pub use ma_measure::{MAAtomicResult, Partition, PartitionMeasure, SubdiffCell};
pub use solver::{AtomicMeasure, SolveConfig, SolveReport};
