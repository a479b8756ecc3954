use alloc::vec::Vec;

use super::{Partition, PartitionMeasure};
use crate::error::{Error, Result};
use crate::gconvex::{mollify_global, GridFunction, MollifierSpec};
use crate::geometry::ScalarDensity;

/// Estimate `M_ρ[u]` on a partition by mollifying `u` and integrating
/// `ρ det(I + D²u_δ)` with central differences and the midpoint rule. A node
/// on a bin edge is shared equally between the neighbouring bins.
pub fn ma_oracle_smooth(
    u: &GridFunction,
    delta: f64,
    partition: &Partition,
    rho: &ScalarDensity,
) -> Result<PartitionMeasure> {
    let dim = u.dim();
    if dim != partition.dim() {
        return Err(Error::DimensionMismatch { expected: partition.dim(), found: dim });
    }
    if dim > 2 {
        return Err(Error::InvalidInput("smooth oracle supports dimensions 1 and 2".into()));
    }
    let ud = mollify_global(u, &MollifierSpec::new(delta)?)?;
    let h = ud.spacing();
    let h2 = h * h;
    let cell = if dim == 1 { h } else { h2 };
    let mut masses = alloc::vec![0.0; partition.len()];
    for i in 0..ud.values().len() {
        let c = ud.multi(i);
        let x = ud.node(i);
        let at = |da: i64, db: i64| {
            let mut j = c;
            j[0] += da;
            if dim == 2 {
                j[1] += db;
            }
            ud.at(&j[..dim])
        };
        let u0 = ud.values()[i];
        let det = if dim == 1 {
            1.0 + (at(1, 0) + at(-1, 0) - 2.0 * u0) / h2
        } else {
            let uxx = (at(1, 0) + at(-1, 0) - 2.0 * u0) / h2;
            let uyy = (at(0, 1) + at(0, -1) - 2.0 * u0) / h2;
            let uxy = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h2);
            (1.0 + uxx) * (1.0 + uyy) - uxy * uxy
        };
        let weight = rho.eval(&x) * det * cell;
        let tol = 1e-9;
        let wa = partition.axis_weights(x[0], tol);
        if dim == 1 {
            for (j, w) in wa {
                masses[j] += w * weight;
            }
        } else {
            let wb = partition.axis_weights(x[1], tol);
            for (ja, fa) in wa {
                for (jb, fb) in wb {
                    masses[ja * partition.bins_per_axis() + jb] += fa * fb * weight;
                }
            }
        }
    }
    let stderr: Vec<f64> = alloc::vec![0.0; masses.len()];
    Ok(PartitionMeasure { partition: partition.clone(), masses, stderr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::EnvelopeFunction;
    use crate::geometry::Point;
    use alloc::vec;

    #[test]
    fn zero_function_gives_density_integrals() {
        let rho = ScalarDensity::cosine_1d(0.5).unwrap();
        let part = Partition::uniform(1, 8).unwrap();
        let u = GridFunction::constant(1, 512, 0.0).unwrap();
        let est = ma_oracle_smooth(&u, 0.02, &part, &rho).unwrap();
        let exact = part.integrate_density(&rho);
        assert!(est.max_abs_diff(&exact) < 1e-4, "{:?} {:?}", est.masses, exact);
    }

    #[test]
    fn kink_concentrates_mass() {
        let f = EnvelopeFunction::with_default_truncation(vec![Point::new(&[0.0])], vec![0.0]).unwrap();
        let u = GridFunction::sample(&f.hull().unwrap(), 1024).unwrap();
        let part = Partition::with_offset(1, 4, 0.125).unwrap();
        let est = ma_oracle_smooth(&u, 0.02, &part, &ScalarDensity::uniform()).unwrap();
        let at = part.locate(&Point::new(&[0.0]));
        assert!(est.masses[at] >= 0.95 * est.total());
    }

    #[test]
    fn two_dimensional_total_is_one() {
        let u = GridFunction::from_fn(2, 64, |x| 0.01 * crate::math::cos(crate::math::TAU * x[0])).unwrap();
        let part = Partition::uniform(2, 4).unwrap();
        let est = ma_oracle_smooth(&u, 0.05, &part, &ScalarDensity::uniform()).unwrap();
        assert!((est.total() - 1.0).abs() < 1e-3);
    }
}
