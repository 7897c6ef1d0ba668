use hermcurv::numerics::{self, HermitianMatrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_pd(n: usize, seed: u64) -> HermitianMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = numerics::ginibre(n, n, &mut rng);
    let m = &z * z.adjoint() + numerics::CMat::identity(n, n) * numerics::C64::new(0.5, 0.0);
    HermitianMatrix::symmetrized(m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn eigh_reconstructs(n in 2usize..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = numerics::random_hermitian(n, &mut rng);
        let e = numerics::eigh(&h);
        prop_assert!(numerics::max_abs_diff(&e.reconstruct(), h.matrix()) <= 1e-10);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn double_inverse(n in 1usize..=4, seed in any::<u64>()) {
        let g = random_pd(n, seed);
        let back = numerics::invert_pd(&numerics::invert_pd(&g).unwrap()).unwrap();
        prop_assert!(numerics::max_abs_diff(back.matrix(), g.matrix()) <= 1e-9);
    }

    #[test]
    fn frames_after_unitary_change(n in 1usize..=4, seed in any::<u64>()) {
        let g = random_pd(n, seed);
        let w = numerics::random_unitary(n, seed ^ 0x5a5a);
        // g in rotated coordinates z = W z'.
        let rotated = HermitianMatrix::symmetrized(w.transpose() * g.matrix() * w.map(|z| z.conj()));
        let tag = numerics::FrameTag::new("random", &[]);
        let e = numerics::unitary_frame(&rotated, tag).unwrap();
        prop_assert!(numerics::frame_gram_error(e.matrix(), &rotated) <= 1e-10);
        let back = &w * e.matrix();
        prop_assert!(numerics::frame_gram_error(&back, &g) <= 1e-10);
    }
}
