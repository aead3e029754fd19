//! The fixed-point accuracy experiment: 64×16 i.i.d. channels at SNRs drawn
//! uniformly from 10–20 dB, fixed-point inverse against the Gauss-Jordan
//! oracle applied to the double-precision regularized Gram matrix.

#![allow(dead_code)]

use bldl_core::linksim::{gen_channel_with, ChannelModel};
use bldl_core::prep::{
    gram_regularized, normalize_channel, preprocess, reference_inverse, FixedConfig, FixedEngine, NoiseConfig,
    Normalization, Reference,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const SEED: u64 = 0x5eed_ca1b;
pub const TRIALS: usize = 1000;
pub const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/fixed_error_bound.txt");

/// Relative Frobenius error of trial `i`.
pub fn trial_error(i: usize) -> f64 {
    let (b, u) = (64, 16);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    rng.set_stream(i as u64);
    let h = gen_channel_with(&ChannelModel::iid(b, u, SEED), &mut rng).expect("i.i.d. channel");
    let snr_db: f64 = rng.gen_range(10.0..=20.0);
    let noise = NoiseConfig::new(u as f64 / 10f64.powf(snr_db / 10.0), 1.0).expect("positive noise");

    let fixed = preprocess(&FixedEngine::new(FixedConfig::default()), &h, &noise, Normalization::Global)
        .expect("regularized system is positive definite");
    let hn = normalize_channel(&h, Normalization::Global).expect("nonzero channel");
    let a = gram_regularized(&Reference::default(), &hn, &noise).expect("Gram matrix").to_dense();
    let oracle = reference_inverse(&a).expect("regularized system is invertible");
    fixed.inverse.to_dense().rel_error(&oracle)
}

pub fn errors() -> Vec<f64> {
    (0..TRIALS).into_par_iter().map(trial_error).collect()
}

/// The committed bound.
pub fn recorded_bound() -> f64 {
    let text = std::fs::read_to_string(FIXTURE).expect("calibration fixture");
    let kv = bldl_core::io::parse_key_values(&text).expect("key=value fixture");
    kv["bound_rel_frobenius"].parse().expect("numeric bound")
}
