mod common;

use bldl_core::dense::CMatrix;
use bldl_core::linksim::{
    ber_sweep, dft_pilots, gen_channel, ls_channel_estimate, run_trial, ChannelModel, Estimation, Preprocessor,
    SweepConfig,
};
use common::{random_channel, rng};
use proptest::prelude::*;

#[test]
fn float_ber_falls_with_snr_within_binomial_band() {
    let model = ChannelModel::iid(64, 16, 3);
    let cfg = SweepConfig::new(vec![0.0, 4.0, 8.0, 12.0, 16.0, 20.0], 300, Preprocessor::BldlFloat, 11);
    let curve = ber_sweep(&cfg, &model).unwrap();
    for w in curve.records.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let sd = |p: f64, n: u64| (p * (1.0 - p) / n as f64).sqrt();
        let band = 3.0 * (sd(a.ber, a.bits_total).powi(2) + sd(b.ber, b.bits_total).powi(2)).sqrt();
        assert!(b.ber <= a.ber + band, "{a:?} -> {b:?}");
    }
    assert!(curve.records[0].ber > 0.05);
}

#[test]
fn float_path_matches_direct_solve_trial_for_trial() {
    let model = ChannelModel::iid(64, 16, 5);
    let bldl = SweepConfig::new(vec![25.0, 35.0], 200, Preprocessor::BldlFloat, 9);
    let direct = SweepConfig { preprocessor: Preprocessor::Direct, ..bldl.clone() };
    for si in 0..2 {
        for ti in 0..200 {
            assert_eq!(run_trial(&bldl, &model, si, ti).unwrap(), run_trial(&direct, &model, si, ti).unwrap());
        }
    }
}

#[test]
fn sweeps_do_not_depend_on_worker_count() {
    let model = ChannelModel::iid(32, 8, 1);
    let mut cfg = SweepConfig::new(vec![5.0, 15.0], 64, Preprocessor::BldlFixed, 21);
    cfg.estimation = Estimation::Ls;
    let parallel = ber_sweep(&cfg, &model).unwrap();
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| ber_sweep(&cfg, &model).unwrap());
    assert_eq!(parallel.to_csv(), single.to_csv());
}

#[test]
fn los_sweep_is_sane() {
    let model = ChannelModel::los(64, 16, 4.0, 2);
    for pre in [Preprocessor::BldlFloat, Preprocessor::BldlFixedRd, Preprocessor::Neumann(3)] {
        let curve = ber_sweep(&SweepConfig::new(vec![10.0, 30.0], 50, pre, 4), &model).unwrap();
        for r in &curve.records {
            assert!((0.0..=0.5).contains(&r.ber), "{pre}: {r:?}");
            assert_eq!(r.bits_total, 50 * 64 - r.singular_trials * 64);
        }
    }
}

#[test]
fn ls_error_scales_with_noise() {
    // Per-entry error variance of Y·P⁻¹ with P = √(U·Es)·F is n0 / (U·Es).
    let (b, u, es) = (64, 8, 2.0);
    let p = dft_pilots(u, es);
    let mut r = rng(8);
    for n0 in [0.1, 1.0] {
        let g = rand_distr::Normal::new(0.0, (n0 / 2.0f64).sqrt()).unwrap();
        let mut acc = 0.0;
        let trials = 200;
        for _ in 0..trials {
            let h = random_channel(&mut r, b, u);
            let hp = h.entries() * &p;
            let y = CMatrix::from_fn(b, u, |i, j| {
                hp[(i, j)] + num_complex::Complex64::new(rand::Rng::sample(&mut r, g), rand::Rng::sample(&mut r, g))
            });
            let est = ls_channel_estimate(&p, &y).unwrap();
            acc += (&est.reconstruct() - h.entries()).frobenius().powi(2);
        }
        let var = acc / (trials * b * u) as f64;
        let expected = n0 / (u as f64 * es);
        assert!((var / expected - 1.0).abs() < 0.05, "n0={n0}: {var} vs {expected}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn noiseless_ls_is_exact(seed in any::<u64>(), n in 1usize..=8, es in 0.1f64..10.0) {
        let h = gen_channel(&ChannelModel::iid(4 * n, 2 * n, seed)).unwrap();
        let p = dft_pilots(2 * n, es);
        let est = ls_channel_estimate(&p, &(h.entries() * &p)).unwrap();
        prop_assert!(est.reconstruct().rel_error(h.entries()) < 1e-12);
    }

    #[test]
    fn sweeps_are_seed_deterministic(seed in any::<u64>()) {
        let model = ChannelModel::iid(16, 4, seed);
        let cfg = SweepConfig::new(vec![0.0, 10.0], 20, Preprocessor::Neumann(2), seed);
        let a = ber_sweep(&cfg, &model).unwrap().to_csv();
        prop_assert_eq!(a, ber_sweep(&cfg, &model).unwrap().to_csv());
    }
}
