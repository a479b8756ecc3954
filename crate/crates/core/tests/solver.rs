use hessma_core::envelope::{envelope_eval, EnvelopeFunction};
use hessma_core::solver::{
    mass_jacobian_fd, quantize_measure, solve_flat, solve_general, solve_newton, solve_twisted, AtomicMeasure,
    DensitySpec, FlatPathConfig, SolveConfig,
};
use hessma_core::{Error, Point, ScalarDensity};

fn p1(x: f64) -> Point {
    Point::new(&[x])
}

fn two_atoms() -> AtomicMeasure {
    AtomicMeasure::new(vec![p1(0.0), p1(0.5)], vec![0.5, 0.5]).unwrap()
}

fn cosine() -> ScalarDensity {
    ScalarDensity::cosine_1d(0.5).unwrap()
}

#[test]
fn single_atom_closed_form() {
    let mu = AtomicMeasure::dirac(p1(0.0));
    let (f, rep) = solve_twisted(&mu, &ScalarDensity::uniform(), 1.0, &SolveConfig::default()).unwrap();
    assert!(rep.converged);
    assert!(f.values()[0].abs() < 1e-12);
    for k in 0..=64 {
        let x = -0.5 + k as f64 / 64.0;
        let exact = x.abs() / 2.0 - x * x / 2.0;
        assert!((envelope_eval(&f, &p1(x)).unwrap() - exact).abs() < 1e-12);
    }
}

#[test]
fn two_atom_closed_form() {
    let (f, rep) = solve_twisted(&two_atoms(), &ScalarDensity::uniform(), 1.0, &SolveConfig::default()).unwrap();
    assert!(rep.converged);
    assert!(f.values().iter().all(|s| s.abs() < 1e-10));
    assert!((envelope_eval(&f, &p1(0.25)).unwrap() - 1.0 / 32.0).abs() < 1e-10);
}

#[test]
fn cosine_density_half_exponent() {
    let mu = AtomicMeasure::dirac(p1(0.0));
    let (f, _) = solve_twisted(&mu, &cosine(), 0.5, &SolveConfig::default()).unwrap();
    assert!((f.values()[0] - 2.0 * 1.5f64.ln()).abs() < 1e-10);
}

#[test]
fn newton_matches_damped() {
    let cases: Vec<(AtomicMeasure, ScalarDensity, f64)> = vec![
        (AtomicMeasure::dirac(p1(0.0)), ScalarDensity::uniform(), 1.0),
        (two_atoms(), ScalarDensity::uniform(), 1.0),
        (AtomicMeasure::dirac(p1(0.0)), cosine(), 0.5),
        (
            AtomicMeasure::new(vec![p1(-0.3), p1(0.05), p1(0.2)], vec![0.2, 0.5, 0.3]).unwrap(),
            cosine(),
            0.7,
        ),
        (
            AtomicMeasure::new(
                vec![Point::new(&[0.0, 0.0]), Point::new(&[0.3, 0.1]), Point::new(&[-0.2, 0.35])],
                vec![0.5, 0.3, 0.2],
            )
            .unwrap(),
            ScalarDensity::uniform(),
            1.0,
        ),
    ];
    for (mu, rho, eps) in cases {
        let (a, ra) = solve_twisted(&mu, &rho, eps, &SolveConfig::default()).unwrap();
        let (b, rb) = solve_newton(&mu, &rho, eps, &SolveConfig::default()).unwrap();
        assert!(ra.converged && rb.converged, "{ra:?} {rb:?}");
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-8, "{:?} vs {:?}", a.values(), b.values());
        }
    }
}

#[test]
fn newton_single_atom_is_fast() {
    let mu = AtomicMeasure::dirac(p1(0.0));
    let (_, rep) = solve_newton(&mu, &cosine(), 0.5, &SolveConfig::default()).unwrap();
    assert!(rep.converged && rep.iterations <= 3, "{rep:?}");
}

#[test]
fn newton_is_permutation_equivariant() {
    let mu = AtomicMeasure::new(vec![p1(-0.3), p1(0.05), p1(0.2)], vec![0.2, 0.5, 0.3]).unwrap();
    let perm = [2, 0, 1];
    let (a, _) = solve_newton(&mu, &cosine(), 1.0, &SolveConfig::default()).unwrap();
    let (b, _) = solve_newton(&mu.permuted(&perm), &cosine(), 1.0, &SolveConfig::default()).unwrap();
    for (k, &j) in perm.iter().enumerate() {
        assert!((b.values()[k] - a.values()[j]).abs() < 1e-12);
    }
}

#[test]
fn liftoff_is_repaired() {
    // Start far from the solution with one site lifted off the hull.
    let mu = AtomicMeasure::new(vec![p1(0.0), p1(0.1)], vec![0.5, 0.5]).unwrap();
    let (f, rep) = hessma_core::solver::solve_twisted_from(
        &mu,
        &ScalarDensity::uniform(),
        1.0,
        &SolveConfig::default(),
        Some(&[0.0, 3.0]),
    )
    .unwrap();
    assert!(rep.converged);
    assert!(rep.history[0].is_infinite());
    let h = hessma_core::ma_measure::ma_atomic(&f, &ScalarDensity::uniform()).unwrap();
    assert!(h.masses.iter().all(|m| *m > 0.0));
}

#[test]
fn unanchored_and_invalid_exponents() {
    let mu = AtomicMeasure::dirac(p1(0.0));
    let rho = ScalarDensity::uniform();
    assert_eq!(solve_twisted(&mu, &rho, 0.0, &SolveConfig::default()).unwrap_err(), Error::UnanchoredProblem);
    assert!(solve_twisted(&mu, &rho, 1.5, &SolveConfig::default()).is_err());
    assert_eq!(FlatPathConfig::geometric(0.5, 0.0).unwrap_err(), Error::UnanchoredProblem);
}

#[test]
fn max_iter_is_reported() {
    let mu = AtomicMeasure::new(vec![p1(0.0), p1(0.3)], vec![0.8, 0.2]).unwrap();
    let cfg = SolveConfig { max_iter: 1, ..SolveConfig::default() };
    let (_, rep) = solve_twisted(&mu, &ScalarDensity::uniform(), 1.0, &cfg).unwrap();
    assert!(!rep.converged);
    assert!(matches!(rep.check(), Err(Error::MaxIterExceeded { .. })));
}

#[test]
fn jacobian_examples() {
    let rho = ScalarDensity::uniform();
    let single = EnvelopeFunction::with_default_truncation(vec![p1(0.0)], vec![0.0]).unwrap();
    let j = mass_jacobian_fd(&single, &rho, 1e-6).unwrap();
    assert_eq!(j.get(0, 0), 0.0);

    let two = EnvelopeFunction::with_default_truncation(vec![p1(0.0), p1(0.5)], vec![0.0, 0.0]).unwrap();
    let j = mass_jacobian_fd(&two, &rho, 1e-6).unwrap();
    assert!(j.get(0, 0) < 0.0);
    assert!((j.get(0, 1) + j.get(0, 0)).abs() < 1e-8);
    assert!(!j.one_sided);

    let three = EnvelopeFunction::with_default_truncation(
        vec![Point::new(&[0.0, 0.0]), Point::new(&[0.3, 0.1]), Point::new(&[-0.2, 0.35])],
        vec![0.0, 0.01, -0.02],
    )
    .unwrap();
    let j = mass_jacobian_fd(&three, &rho, 1e-6).unwrap();
    assert!(j.max_row_sum() <= 1e-8, "{}", j.max_row_sum());

    // Directional derivative check.
    let dir = [0.3, -0.7, 0.4];
    let t = 1e-5;
    let shifted = |sign: f64| {
        let vals: Vec<f64> = three.values().iter().zip(&dir).map(|(s, d)| s + sign * t * d).collect();
        hessma_core::ma_measure::ma_atomic(&three.with_values(vals), &rho).unwrap().masses
    };
    let (up, down) = (shifted(1.0), shifted(-1.0));
    for i in 0..3 {
        let fd = (up[i] - down[i]) / (2.0 * t);
        let lin: f64 = (0..3).map(|k| j.get(i, k) * dir[k]).sum();
        assert!((fd - lin).abs() <= 1e-4 * fd.abs().max(1e-3), "{fd} vs {lin}");
    }
}

#[test]
fn general_lebesgue_converges_to_zero() {
    let schedule = [4, 8, 16, 32, 64, 128, 256];
    let rep = solve_general(
        &DensitySpec::lebesgue(),
        1,
        &schedule,
        &ScalarDensity::uniform(),
        1.0,
        &SolveConfig::newton(),
    )
    .unwrap();
    assert!(rep.monotone);
    let at64 = rep.steps.iter().find(|s| s.atoms == 64).unwrap();
    assert!(at64.sup_abs <= 0.05);
}

#[test]
fn general_spike_matches_direct_solve() {
    let spec = DensitySpec::spike(p1(0.1));
    let direct = solve_twisted(&AtomicMeasure::dirac(p1(0.1)), &cosine(), 1.0, &SolveConfig::default()).unwrap().0;
    let rep = solve_general(&spec, 1, &[1, 4, 16], &cosine(), 1.0, &SolveConfig::default()).unwrap();
    for step in &rep.steps {
        assert_eq!(step.measure.len(), 1);
        assert!((step.solution.values()[0] - direct.values()[0]).abs() < 1e-10);
        assert!((step.solution.sites()[0][0] - 0.1).abs() < 1e-14);
    }

    let two = DensitySpec::Samples { dim: 1, points: vec![(p1(0.0), 0.5), (p1(0.5), 0.5)] };
    let q = quantize_measure(&two, 1, 4).unwrap();
    let (a, _) = solve_twisted(&q, &ScalarDensity::uniform(), 1.0, &SolveConfig::default()).unwrap();
    let (b, _) = solve_twisted(&two_atoms(), &ScalarDensity::uniform(), 1.0, &SolveConfig::default()).unwrap();
    let mut av = a.values().to_vec();
    let mut bv = b.values().to_vec();
    av.sort_by(f64::total_cmp);
    bv.sort_by(f64::total_cmp);
    for (x, y) in av.iter().zip(&bv) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn flat_single_atom_cosine() {
    let mu = AtomicMeasure::dirac(p1(0.0));
    let a = solve_flat(&mu, &cosine(), &FlatPathConfig::geometric(0.5, 1e-3).unwrap()).unwrap();
    let b = solve_flat(&mu, &cosine(), &FlatPathConfig::geometric(1.0 / 3.0, 1e-3).unwrap()).unwrap();
    assert!(a.converged && b.converged);
    assert!((a.c - 1.5).abs() < 1e-3, "{}", a.c);
    assert!((a.c - b.c).abs() < 2e-3);
}

#[test]
fn flat_uniform_density_gives_unit_constant() {
    let mu = AtomicMeasure::new(vec![p1(-0.3), p1(0.05), p1(0.2)], vec![0.2, 0.5, 0.3]).unwrap();
    let rep = solve_flat(&mu, &ScalarDensity::uniform(), &FlatPathConfig::geometric(0.5, 1e-3).unwrap()).unwrap();
    assert!(rep.converged);
    assert!((rep.c - 1.0).abs() < 1e-3, "{}", rep.c);
    assert!(rep.spread_ok);
    assert!(rep.mass_residual < 1e-2);
}

#[test]
fn warm_start_matches_cold_start() {
    let mu = AtomicMeasure::new(vec![p1(-0.3), p1(0.05), p1(0.2)], vec![0.2, 0.5, 0.3]).unwrap();
    let rho = cosine();
    let path = FlatPathConfig { schedule: vec![1.0, 0.5, 0.25], ..FlatPathConfig::geometric(0.5, 0.25).unwrap() };
    let warm = solve_flat(&mu, &rho, &path).unwrap();
    let (cold, _) = solve_newton(&mu, &rho, 0.25, &SolveConfig::default()).unwrap();
    let (hot, _) = solve_newton(&mu, &rho, 0.25, &SolveConfig::default()).unwrap();
    assert_eq!(cold.values(), hot.values());
    assert!((warm.c - (0.25 * cold.values().iter().sum::<f64>() / 3.0).exp()).abs() < 1e-9);
}
