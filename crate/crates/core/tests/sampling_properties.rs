use hermcurv::curvature;
use hermcurv::metric::{catalog, params};
use hermcurv::numerics::{self, C64};
use hermcurv::sampling::{self, berger_check, fs_moment, fs_moment_with, synthetic_tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn moments_are_unitarily_invariant() {
    for (n, idx) in [(2, [0, 0, 1, 1]), (3, [0, 1, 1, 0]), (3, [2, 2, 2, 2])] {
        let u = numerics::random_unitary(n, 17);
        let plain = fs_moment(n, idx, 200_000, 3).unwrap();
        let rotated = fs_moment_with(n, idx, 200_000, 4, Some(&u)).unwrap();
        let se = (plain.std_error.powi(2) + rotated.std_error.powi(2)).sqrt();
        assert!((plain.value - rotated.value).norm() <= 3.0 * se + 1e-4, "{plain:?} {rotated:?}");
        assert!(rotated.within_gate);
    }
}

#[test]
fn unpaired_indices_average_to_zero() {
    for (n, idx) in [(2, [0, 1, 1, 1]), (3, [0, 1, 2, 2]), (3, [0, 0, 0, 2])] {
        let m = fs_moment(n, idx, 200_000, 5).unwrap();
        assert_eq!(m.closed_form, 0.0);
        assert!(m.value.norm() <= 3.0 * m.std_error + sampling::ABSOLUTE_FLOOR, "{m:?}");
    }
}

#[test]
fn berger_average_on_synthetic_tensors() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in 0..20u64 {
        let n = 2 + (k as usize % 2);
        let t = synthetic_tensor(n, &mut rng);
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.5)).collect();
        let r = berger_check(&t, &b, 100_000, k).unwrap();
        assert!(r.agree, "{r:?}");
    }
}

#[test]
fn berger_gap_for_example_2_2() {
    let spec = catalog("example_2_2", &params(&[("eps", 0.3)])).unwrap();
    let t = curvature::unitary_tensor(&spec.jet(&[C64::new(0.0, 0.0); 2]).unwrap()).unwrap();
    let r = berger_check(&t, &[1.0, 1.0], 100_000, 1).unwrap();
    assert!(r.agree);
    assert!((r.pair_sum - 4.2).abs() <= 1e-12);
    let frame = match t.frame() {
        curvature::Frame::Unitary(e) => e.clone(),
        curvature::Frame::Coordinate => unreachable!(),
    };
    let b = curvature::rbc_value(&t, &curvature::FrameWeights::new(frame, &[1.0, 1.0]).unwrap()).unwrap();
    assert!(b < 0.0 && r.pair_sum > 0.0);
}
