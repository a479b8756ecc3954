//! Alexandrov Monge-Ampère measures.
//!
//! For an envelope function the measure `M_ρ[u]` is atomic with mass
//! `ρ(a_i) · |∂v(a_i)|` at each site ([`ma_atomic`]). Two brute-force oracles
//! estimate the same measure on a partition of the torus without using the
//! hull: slope sampling ([`ma_oracle_slopes`]) and mollified Hessian
//! determinants ([`ma_oracle_smooth`]). [`chart`] carries the window-level
//! (Euclidean) versions used by the measure lemmas in [`lemmas`].

mod cells;
pub mod chart;
pub mod lemmas;
mod partition;
mod slopes;
mod smooth;

pub use cells::{
    convex_hull_2d, ma_atomic, subdifferential, total_mass, CellGeometry, MAAtomicResult, MassBounds, SubdiffCell,
    TotalMass,
};
pub use lemmas::{check_mass_comparison, check_max_inequality, check_superadditivity, LemmaReport};
pub use partition::{Partition, PartitionMeasure};
pub use slopes::{ma_oracle_slopes, SlopeOracleConfig, SlopeSampler};
pub use smooth::ma_oracle_smooth;
