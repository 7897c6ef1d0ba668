use hermcurv::certify::{self, Budget, Condition, PsdDirection, Status};
use hermcurv::curvature::{self, ChernTensor};
use hermcurv::metric::{catalog, params, sample_ball};
use hermcurv::numerics;
use hermcurv::sampling::synthetic_tensor;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn budget(seed: u64) -> Budget {
    Budget {
        samples: 2_000,
        starts: 8,
        seed,
        ..Budget::default()
    }
}

/// A catalog tensor at a random point, or a synthetic pair-symmetric one.
fn tensor(which: usize, seed: u64) -> ChernTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (name, p): (&str, Vec<(&str, f64)>) = match which {
        0 => ("flat", vec![("n", 2.0)]),
        1 => ("fubini_study_affine", vec![("n", 3.0)]),
        2 => ("example_2_2", vec![("eps", 0.3)]),
        3 => ("example_2_2_dual", vec![("eps", 0.3)]),
        4 => ("example_2_3", vec![("b", 1.0)]),
        _ => return synthetic_tensor(2 + which % 2, &mut rng),
    };
    let spec = catalog(name, &params(&p)).unwrap();
    let r = spec.domain_hint().map_or(0.5, |r| 0.9 * r);
    let pt = sample_ball(spec.dim(), r, &mut rng);
    curvature::unitary_tensor(&spec.jet(&pt).unwrap()).unwrap()
}

fn conditions() -> impl Strategy<Value = Condition> {
    (prop_oneof![Just(">"), Just(">="), Just("<"), Just("<=")], -2.0..2.0f64)
        .prop_map(|(rel, c)| Condition::parse(&format!("B{rel}{c}")).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn sandwich(which in 0usize..7, seed in any::<u64>()) {
        let t = tensor(which, seed);
        let v = certify::certify_sign(&t, Condition::parse("B>=0").unwrap(), &budget(seed)).unwrap();
        prop_assert!(v.spectral_lower <= v.best_min && v.best_min <= v.best_max && v.best_max <= v.spectral_upper);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        for _ in 0..50 {
            let rank = rng.random_range(1..=t.dim());
            let f = numerics::ginibre(t.dim(), rank, &mut rng);
            let q = curvature::quad_form(&t, &PsdDirection::from_factor(&f).unwrap()).unwrap();
            prop_assert!(v.spectral_lower - 1e-12 <= q && q <= v.spectral_upper + 1e-12);
        }
    }

    #[test]
    fn witnesses_reproduce(which in 0usize..7, seed in any::<u64>(), cond in conditions()) {
        let t = tensor(which, seed);
        let v = certify::certify_sign(&t, cond, &budget(seed)).unwrap();
        match v.status {
            Status::Refuted => {
                let w = v.witness.as_ref().unwrap();
                let q = curvature::quad_form(&t, w).unwrap();
                prop_assert!((q - v.witness_value.unwrap()).abs() <= 1e-9);
                prop_assert!(cond.violated_by(q));
            }
            Status::Certified => prop_assert!(!cond.violated_by(v.best_min) && !cond.violated_by(v.best_max)),
            Status::Inconclusive => {}
        }
    }

    #[test]
    fn verdicts_are_deterministic(which in 0usize..7, seed in any::<u64>()) {
        let t = tensor(which, seed);
        let c = Condition::parse("B>0").unwrap();
        let a = serde_json::to_string(&certify::certify_sign(&t, c, &budget(seed)).unwrap()).unwrap();
        let b = serde_json::to_string(&certify::certify_sign(&t, c, &budget(seed)).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn more_samples_never_worsen_envelopes(which in 0usize..7, seed in any::<u64>(), count in 100usize..3000) {
        let t = tensor(which, seed);
        let small = certify::sample_extrema(&t, count, seed);
        let large = certify::sample_extrema(&t, 2 * count, seed);
        prop_assert!(large.min.value <= small.min.value);
        prop_assert!(large.max.value >= small.max.value);
    }
}

#[test]
fn fubini_study_envelopes() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [2usize, 3] {
        let spec = catalog("fubini_study_affine", &params(&[("n", n as f64)])).unwrap();
        for k in 0..5 {
            let p = sample_ball(n, 1.0, &mut rng);
            let t = curvature::unitary_tensor(&spec.jet(&p).unwrap()).unwrap();
            let b = Budget {
                samples: 5_000,
                starts: 16,
                seed: k,
                ..Budget::default()
            };
            let v = certify::certify_sign(&t, Condition::parse("B>0").unwrap(), &b).unwrap();
            assert!((v.best_min - 2.0).abs() <= 1e-6, "{}", v.best_min);
            assert!((v.best_max - (n as f64 + 1.0)).abs() <= 1e-6, "{}", v.best_max);
            assert_eq!(v.status, Status::Certified);
        }
    }
}
