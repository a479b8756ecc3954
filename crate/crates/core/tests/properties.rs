use hessma_core::envelope::envelope_eval;
use hessma_core::gconvex::{
    check_gconvex, compose_reparam, gmax, lipschitz_and_bounds, mollify_global, normalize_sup_envelope,
    CompactnessConstants, GridFunction, MollifierSpec, Reparam,
};
use hessma_core::ma_measure::{ma_atomic, MassBounds};
use hessma_core::{EnvelopeFunction, Point, ScalarDensity};
use proptest::prelude::*;

fn envelope_1d(xs: &[f64], vals: &[f64]) -> Option<EnvelopeFunction> {
    EnvelopeFunction::with_default_truncation(xs.iter().map(|x| Point::new(&[*x])).collect(), vals.to_vec()).ok()
}

fn envelope_2d(xs: &[(f64, f64)], vals: &[f64]) -> Option<EnvelopeFunction> {
    EnvelopeFunction::with_default_truncation(xs.iter().map(|(a, b)| Point::new(&[*a, *b])).collect(), vals.to_vec())
        .ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn envelope_is_idempotent(xs in proptest::collection::vec(-0.5f64..0.5, 1..8),
                              vals in proptest::collection::vec(-0.3f64..0.3, 8)) {
        let Some(f) = envelope_1d(&xs, &vals[..xs.len()]) else { return Ok(()); };
        let hull = f.hull().unwrap();
        let at_sites: Vec<f64> = f.sites().iter().map(|a| hull.eval(a)).collect();
        for (u, s) in at_sites.iter().zip(f.values()) {
            prop_assert!(*u <= s + 1e-12);
        }
        let g = f.with_values(at_sites).hull().unwrap();
        for x in GridFunction::nodes(1, 97) {
            prop_assert!((hull.eval(&x) - g.eval(&x)).abs() <= 1e-12);
        }
    }

    #[test]
    fn translation_covariance(xs in proptest::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 1..5),
                              vals in proptest::collection::vec(-0.2f64..0.2, 5), t in -3.0f64..3.0) {
        let Some(f) = envelope_2d(&xs, &vals[..xs.len()]) else { return Ok(()); };
        let (a, b) = (f.hull().unwrap(), f.shifted(t).hull().unwrap());
        for x in GridFunction::nodes(2, 9) {
            prop_assert!((b.eval(&x) - a.eval(&x) - t).abs() <= 1e-10);
        }
    }

    #[test]
    fn normalized_envelopes_are_in_k0(xs in proptest::collection::vec(-0.5f64..0.5, 1..8),
                                      vals in proptest::collection::vec(-0.5f64..0.5, 8)) {
        let Some(f) = envelope_1d(&xs, &vals[..xs.len()]) else { return Ok(()); };
        let g = normalize_sup_envelope(&f).unwrap();
        let grid = GridFunction::sample(&g.hull().unwrap(), 512).unwrap();
        let stats = lipschitz_and_bounds(&grid);
        let k = CompactnessConstants::torus(1);
        prop_assert!(stats.sup <= 1e-9);
        prop_assert!(stats.inf >= -k.c0 - 1e-9);
        prop_assert!(stats.lip <= k.c1 + 1e-9);
    }

    #[test]
    fn normalized_envelopes_are_in_k0_2d(xs in proptest::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 1..5),
                                         vals in proptest::collection::vec(-0.3f64..0.3, 5)) {
        let Some(f) = envelope_2d(&xs, &vals[..xs.len()]) else { return Ok(()); };
        let g = normalize_sup_envelope(&f).unwrap();
        let grid = GridFunction::sample(&g.hull().unwrap(), 48).unwrap();
        let stats = lipschitz_and_bounds(&grid);
        let k = CompactnessConstants::torus(2);
        prop_assert!(stats.sup <= 1e-9);
        prop_assert!(stats.inf >= -k.c0 - 1e-9);
        prop_assert!(stats.lip <= k.c1 + 1e-9);
    }

    #[test]
    fn reparam_preserves_gconvexity(xs in proptest::collection::vec(-0.5f64..0.5, 1..6),
                                    vals in proptest::collection::vec(-0.3f64..0.3, 6),
                                    a in 0.0f64..1.0, shift in -1.0f64..1.0) {
        let Some(f) = envelope_1d(&xs, &vals[..xs.len()]) else { return Ok(()); };
        let u = GridFunction::sample(&f.hull().unwrap(), 128).unwrap();
        prop_assert!(check_gconvex(&u, 1e-9).pass);
        // χ(t) = a·log(1 + e^{t - shift}) is convex with slopes in [0, a].
        let chi = Reparam::tabulate(-2.0, 2.0, 2000, |t| a * (1.0 + (t - shift).exp()).ln()).unwrap();
        prop_assert!(check_gconvex(&compose_reparam(&u, &chi), 1e-9).pass);
    }

    #[test]
    fn gmax_of_envelopes_is_gconvex(xs in proptest::collection::vec(-0.5f64..0.5, 2..6),
                                    v1 in proptest::collection::vec(-0.3f64..0.3, 6),
                                    v2 in proptest::collection::vec(-0.3f64..0.3, 6)) {
        let n = xs.len();
        let (Some(f), Some(g)) = (envelope_1d(&xs[..n / 2 + 1], &v1[..n / 2 + 1]), envelope_1d(&xs, &v2[..n])) else {
            return Ok(());
        };
        let a = GridFunction::sample(&f.hull().unwrap(), 128).unwrap();
        let b = GridFunction::sample(&g.hull().unwrap(), 128).unwrap();
        prop_assert!(check_gconvex(&gmax(&a, &b).unwrap(), 1e-9).pass);
    }

    #[test]
    fn mollified_envelopes_stay_gconvex(xs in proptest::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 1..4),
                                        vals in proptest::collection::vec(-0.2f64..0.2, 4),
                                        delta in 0.02f64..0.2) {
        let Some(f) = envelope_2d(&xs, &vals[..xs.len()]) else { return Ok(()); };
        let u = GridFunction::sample(&f.hull().unwrap(), 32).unwrap();
        let v = mollify_global(&u, &MollifierSpec::new(delta).unwrap()).unwrap();
        prop_assert!(check_gconvex(&v, 1e-9).pass);
        let lip = lipschitz_and_bounds(&u).lip;
        prop_assert!(u.sup_distance(&v).unwrap() <= lip * delta + 1e-12);
    }

    #[test]
    fn total_mass_within_density_bounds(xs in proptest::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 1..6),
                                        vals in proptest::collection::vec(-0.2f64..0.2, 6)) {
        let Some(f) = envelope_2d(&xs, &vals[..xs.len()]) else { return Ok(()); };
        let rho = ScalarDensity::cosine(1.0, vec![
            hessma_core::geometry::CosineTerm { freq: vec![1, 0], amp: 0.3 },
            hessma_core::geometry::CosineTerm { freq: vec![1, 1], amp: 0.2 },
        ]).unwrap();
        let total = ma_atomic(&f, &rho).unwrap().total;
        prop_assert!(MassBounds::for_density(&rho).contains(total, 1e-9));
    }
}

#[test]
fn envelope_examples() {
    let f = envelope_1d(&[0.0], &[0.0]).unwrap();
    for (x, u) in [(0.25, 0.09375), (0.0, 0.0), (-0.5, 0.125)] {
        assert!((envelope_eval(&f, &Point::new(&[x])).unwrap() - u).abs() < 1e-15);
    }
    let stats = lipschitz_and_bounds(&GridFunction::sample(&normalize_sup_envelope(&f).unwrap().hull().unwrap(), 256).unwrap());
    assert!(stats.lip <= 1.0 && stats.inf >= -0.125 - 1e-12);
}
