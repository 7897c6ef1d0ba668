use std::collections::BTreeMap;

use hermcurv::certify::PsdDirection;
use hermcurv::curvature::{self, ChernTensor, FrameWeights};
use hermcurv::metric::{catalog, params, sample_ball, MetricSpec};
use hermcurv::numerics::{self, CMat, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn catalog_metrics() -> Vec<MetricSpec> {
    vec![
        catalog("flat", &params(&[("n", 2.0)])).unwrap(),
        catalog("fubini_study_affine", &params(&[("n", 2.0)])).unwrap(),
        catalog("fubini_study_affine", &params(&[("n", 3.0)])).unwrap(),
        catalog("example_2_2", &params(&[("eps", 0.3)])).unwrap(),
        catalog("example_2_2", &params(&[("eps", 0.6), ("n", 3.0)])).unwrap(),
        catalog("example_2_2_dual", &params(&[("eps", 0.3)])).unwrap(),
        catalog("example_2_3", &params(&[("b", 1.0)])).unwrap(),
        catalog("product", &params(&[("n1", 1.0), ("n2", 2.0)])).unwrap(),
    ]
}

fn radius(spec: &MetricSpec) -> f64 {
    spec.domain_hint().map_or(0.5, |r| 0.9 * r)
}

fn random_weights<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.0..1.0)).collect()
}

/// Random frame tensor at a random point of a catalog metric.
fn setup(which: usize, seed: u64) -> (MetricSpec, Vec<C64>, ChaCha8Rng) {
    let specs = catalog_metrics();
    let spec = specs[which % specs.len()].clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = sample_ball(spec.dim(), radius(&spec), &mut rng);
    (spec, p, rng)
}

fn pair_symmetry(t: &ChernTensor) -> f64 {
    let n = t.dim();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    worst = worst.max((t.get(i, j, k, l) - t.get(j, i, l, k).conj()).norm());
                }
            }
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn spectral_form_matches_frame_form(which in 0usize..8, seed in any::<u64>()) {
        let (spec, p, mut rng) = setup(which, seed);
        let jet = spec.jet(&p).unwrap();
        let t = curvature::unitary_tensor(&jet).unwrap();
        let n = spec.dim();
        let u = numerics::random_unitary_with(n, &mut rng);
        let a = random_weights(n, &mut rng);
        let xi = PsdDirection::from_spectral(&u, &a).unwrap();
        let direct = curvature::quad_form(&t, &xi).unwrap();
        let CurvatureFrame { frame, .. } = CurvatureFrame::of(&t);
        let rotated = frame.rotated(&u);
        let t2 = curvature::to_frame(&curvature::chern_tensor(&jet), &rotated).unwrap();
        let weights = FrameWeights::new(rotated, &a).unwrap();
        prop_assert!((direct - curvature::rbc_value(&t2, &weights).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn values_invariant_under_frame_rotation(which in 0usize..8, seed in any::<u64>()) {
        let (spec, p, mut rng) = setup(which, seed);
        let jet = spec.jet(&p).unwrap();
        let t = curvature::unitary_tensor(&jet).unwrap();
        let n = spec.dim();
        let w = numerics::random_unitary_with(n, &mut rng);
        let t_rot = curvature::to_frame(&curvature::chern_tensor(&jet), &CurvatureFrame::of(&t).frame.rotated(&w)).unwrap();
        let mut before = Vec::new();
        let mut after = Vec::new();
        for _ in 0..5 {
            let u = numerics::random_unitary_with(n, &mut rng);
            let a = random_weights(n, &mut rng);
            let xi = PsdDirection::from_spectral(&u, &a).unwrap();
            before.push(curvature::quad_form(&t, &xi).unwrap());
            // The same direction seen from the rotated frame.
            let xi_rot = PsdDirection::from_spectral(&(w.adjoint() * &u), &a).unwrap();
            after.push(curvature::quad_form(&t_rot, &xi_rot).unwrap());
        }
        before.sort_by(f64::total_cmp);
        after.sort_by(f64::total_cmp);
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn one_hot_rbc_is_hsc_of_frame_vector(which in 0usize..8, seed in any::<u64>()) {
        let (spec, p, mut rng) = setup(which, seed);
        let jet = spec.jet(&p).unwrap();
        let coord = curvature::chern_tensor(&jet);
        let n = spec.dim();
        let base = CurvatureFrame::of(&curvature::unitary_tensor(&jet).unwrap()).frame;
        let frame = base.rotated(&numerics::random_unitary_with(n, &mut rng));
        let t = curvature::to_frame(&coord, &frame).unwrap();
        for i in 0..n {
            let mut a = vec![0.0; n];
            a[i] = 1.0;
            let b = curvature::rbc_value(&t, &FrameWeights::new(frame.clone(), &a).unwrap()).unwrap();
            let h = curvature::hsc(&coord, &numerics::column(frame.matrix(), i)).unwrap();
            prop_assert!((b - h).abs() <= 1e-9, "{} vs {}", b, h);
        }
    }

    #[test]
    fn hermitian_pair_symmetry(which in 0usize..8, seed in any::<u64>()) {
        let (spec, p, _) = setup(which, seed);
        let jet = spec.jet(&p).unwrap();
        prop_assert!(pair_symmetry(&curvature::chern_tensor(&jet)) <= 1e-8);
        prop_assert!(pair_symmetry(&curvature::unitary_tensor(&jet).unwrap()) <= 1e-8);
    }

    #[test]
    fn kahler_detection(n in 1usize..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for name in ["flat", "fubini_study_affine"] {
            let spec = catalog(name, &params(&[("n", n as f64)])).unwrap();
            let jet = spec.jet(&sample_ball(n, 1.0, &mut rng)).unwrap();
            let tor = curvature::torsion_eta(&jet);
            prop_assert!(tor.torsion_norm() <= 1e-10);
            let ric = curvature::ricci(&curvature::unitary_tensor(&jet).unwrap()).unwrap();
            prop_assert!(ric.max_disagreement() <= 1e-8);
        }
    }
}

/// Access to the frame of a unitary tensor.
struct CurvatureFrame {
    frame: hermcurv::UnitaryFrame,
}

impl CurvatureFrame {
    fn of(t: &ChernTensor) -> Self {
        match t.frame() {
            curvature::Frame::Unitary(e) => Self { frame: e.clone() },
            curvature::Frame::Coordinate => panic!("expected a unitary tensor"),
        }
    }
}

#[test]
fn example_2_2_has_torsion_away_from_origin() {
    let spec = catalog("example_2_2", &params(&[("eps", 0.3)])).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let mut p = sample_ball(2, 0.15, &mut rng);
        // Keep away from the origin, where the torsion vanishes.
        p[0] += C64::new(0.03, 0.0);
        let tor = curvature::torsion_eta(&spec.jet(&p).unwrap());
        assert!(tor.torsion_norm() > 1e-3, "{}", tor.torsion_norm());
    }
}

#[test]
fn torsion_identity_after_calibration() {
    let e22 = catalog("example_2_2", &params(&[("eps", 0.3)])).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let points: Vec<Vec<C64>> = (0..20).map(|_| sample_ball(2, 0.15, &mut rng)).collect();
    let cal = curvature::calibrate_torsion_factor(&e22, &points).unwrap();
    assert_eq!(cal.chosen, curvature::TORSION_FACTOR);
    for p in &points {
        assert!(curvature::torsion_identity_residual(&e22, p).unwrap() <= 1e-8);
    }
    for n in 1..=3 {
        for name in ["flat", "fubini_study_affine"] {
            let spec = catalog(name, &params(&[("n", n as f64)])).unwrap();
            for _ in 0..10 {
                let p = sample_ball(n, 1.0, &mut rng);
                assert!(curvature::torsion_identity_residual(&spec, &p).unwrap() <= 1e-10);
            }
        }
    }
    let prod = catalog("product", &params(&[("n1", 1.0), ("n2", 2.0)])).unwrap();
    assert!(curvature::torsion_identity_residual(&prod, &[C64::new(0.3, 0.1), C64::new(-0.2, 0.4), C64::new(0.1, 0.0)]).unwrap() <= 1e-10);
}

/// The conjugate-form dual `ᵗg⁻¹` (as printed for example 2.2) is the
/// transpose inverse and is not negatively curved at the origin.
#[test]
fn literal_dual_form_is_transpose_inverse() {
    let eps = 0.3;
    let rows: Vec<Vec<String>> = (1..=2)
        .map(|i| {
            (i..=2)
                .map(|j| {
                    let cross = format!("(2-eps)*z{i}*zb{j}/((1+normsq(z))*(1-(1-eps)*normsq(z)))");
                    if i == j { format!("1/(1+normsq(z)) + {cross}") } else { cross }
                })
                .collect()
        })
        .collect();
    let mut pm = BTreeMap::new();
    pm.insert("eps".to_string(), eps);
    let literal = MetricSpec::new("literal_dual", 2, pm, &rows, Some(0.2)).unwrap();
    let g = catalog("example_2_2", &params(&[("eps", eps)])).unwrap();
    let p = [C64::new(0.1, 0.05), C64::new(-0.07, 0.02)];
    let gp = g.values(&p).unwrap();
    let hp = literal.values(&p).unwrap();
    let prod: CMat = gp.matrix() * hp.matrix().transpose();
    assert!(numerics::max_abs_diff(&prod, &CMat::identity(2, 2)) <= 1e-12);
    let t = curvature::chern_tensor(&literal.jet(&[C64::new(0.0, 0.0); 2]).unwrap());
    let h1 = curvature::hsc(&t, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h2 = curvature::hsc(&t, &[C64::new(s, 0.0), C64::new(0.0, s)]).unwrap();
    assert!(h1 < 0.0 && h2 > 0.0, "{h1} {h2}");
}
