mod common;

use bldl_core::fxp::ComplexFixed;
use bldl_core::prep::{
    backward_substitute, bldl_factorize, det2x2, gram_regularized, neumann_inverse, preprocess,
    reference_inverse, Block2, BlockHermitianMatrix, FixedConfig, FixedEngine, NoiseConfig, Normalization,
    Reference,
};
use common::{random_channel, random_pd, residual, rng};
use num_complex::Complex64;
use proptest::prelude::*;

fn ulp_apart(a: ComplexFixed, b: ComplexFixed) -> bool {
    let ((ar, ai), (br, bi)) = (a.raw(), b.raw());
    (ar - br).abs() <= 1 && (ai - bi).abs() <= 1
}

fn hermitian_block_exact(b: &Block2<Complex64>) -> bool {
    b.m[0][0].im == 0.0 && b.m[1][1].im == 0.0 && b.m[1][0] == b.m[0][1].conj()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn reference_factorization_reconstructs(seed in any::<u64>(), n in 2usize..=8) {
        let dense = random_pd(&mut rng(seed), 2 * n);
        let a = BlockHermitianMatrix::from_dense(&dense);
        let f = bldl_factorize(&Reference::default(), &a).unwrap();
        prop_assert!(f.reconstruct().rel_error(&dense) < 1e-12);
        let x = backward_substitute(&Reference::default(), &f).to_dense();
        prop_assert!(residual(&dense, &x) < 1e-10);
        let oracle = reference_inverse(&dense).unwrap();
        prop_assert!(x.rel_error(&oracle) < 1e-9);
    }

    #[test]
    fn reference_outputs_are_hermitian(seed in any::<u64>(), n in 2usize..=8) {
        let dense = random_pd(&mut rng(seed), 2 * n);
        let a = BlockHermitianMatrix::from_dense(&dense);
        for j in 0..n {
            prop_assert!(hermitian_block_exact(a.upper(j, j)));
        }
        let f = bldl_factorize(&Reference::default(), &a).unwrap();
        for j in 0..n {
            prop_assert!(hermitian_block_exact(f.d(j)));
            let delta = det2x2(f.d(j), false);
            prop_assert!(delta.im == 0.0 && delta.re > 0.0);
        }
        let x = backward_substitute(&Reference::default(), &f);
        for r in 0..2 * n {
            for c in 0..2 * n {
                prop_assert_eq!(x.get(r, c), x.get(c, r).conj());
            }
        }
    }

    #[test]
    fn fixed_outputs_are_hermitian(seed in any::<u64>(), rd in any::<bool>(), rho in 0.01f64..1.0) {
        let h = random_channel(&mut rng(seed), 32, 8);
        let engine = FixedEngine::new(FixedConfig::default().rd(rd));
        let p = preprocess(&engine, &h, &NoiseConfig::from_rho(rho).unwrap(), Normalization::Global).unwrap();
        for j in 0..4 {
            for b in [p.gram.upper(j, j), p.factors.d(j)] {
                prop_assert!(b.m[0][0].raw().1.abs() <= 1 && b.m[1][1].raw().1.abs() <= 1);
                prop_assert!(ulp_apart(b.m[1][0], b.m[0][1].conj()));
            }
            let di = p.factors.dinv(j);
            prop_assert!(ulp_apart(di.m[1][0], di.m[0][1].conj()));
            if rd {
                prop_assert_eq!(di.m[0][0].raw().1, 0);
                prop_assert_eq!(di.m[1][1].raw().1, 0);
            }
        }
        for r in 0..8 {
            for c in 0..8 {
                prop_assert!(ulp_apart(p.inverse.get(r, c), p.inverse.get(c, r).conj()));
            }
        }
    }

    #[test]
    fn neumann_never_beats_exact_path(seed in any::<u64>(), rho in 0.05f64..2.0, b in prop::sample::select(vec![32usize, 64, 128])) {
        let h = random_channel(&mut rng(seed), b, 16);
        let a = gram_regularized(&Reference::default(), &h, &NoiseConfig::from_rho(rho).unwrap()).unwrap();
        let dense = a.to_dense();
        let exact = backward_substitute(&Reference::default(), &bldl_factorize(&Reference::default(), &a).unwrap());
        let approx = neumann_inverse(&a, 3).unwrap();
        prop_assert!(residual(&dense, &approx.to_dense()) >= residual(&dense, &exact.to_dense()));
    }

    #[test]
    fn fixed_point_is_deterministic(seed in any::<u64>()) {
        let h = random_channel(&mut rng(seed), 16, 4);
        let noise = NoiseConfig::from_rho(0.1).unwrap();
        let engine = FixedEngine::default();
        let a = preprocess(&engine, &h, &noise, Normalization::PerRow).unwrap();
        let b = preprocess(&FixedEngine::default(), &h, &noise, Normalization::PerRow).unwrap();
        prop_assert_eq!(a.inverse, b.inverse);
        prop_assert_eq!(a.factors, b.factors);
    }
}

#[test]
fn neumann_dominance_on_random_pd() {
    let mut r = rng(77);
    for u in [4, 8, 12, 16] {
        for _ in 0..25 {
            let dense = random_pd(&mut r, u);
            let a = BlockHermitianMatrix::from_dense(&dense);
            let exact = backward_substitute(&Reference::default(), &bldl_factorize(&Reference::default(), &a).unwrap());
            let approx = neumann_inverse(&a, 3).unwrap();
            assert!(residual(&dense, &approx.to_dense()) >= residual(&dense, &exact.to_dense()));
        }
    }
}

#[test]
fn fixed_point_golden_vector() {
    // Pinned output codes: any change to rounding, widths or operation
    // order shows up here.
    let h = random_channel(&mut rng(20240611), 64, 16);
    let p = preprocess(&FixedEngine::default(), &h, &NoiseConfig::from_rho(0.1).unwrap(), Normalization::Global).unwrap();
    let x = &p.inverse;
    let text = format!(
        "{} {:?} {:?} {:?} {:?}",
        x.scale_exp(),
        x.get(0, 0).raw(),
        x.get(0, 15).raw(),
        x.get(7, 8).raw(),
        x.get(15, 15).raw()
    );
    let expected = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/golden_inverse.txt")).unwrap();
    assert_eq!(text, expected.trim());
}
