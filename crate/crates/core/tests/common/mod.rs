#![allow(dead_code)]

use bldl_core::dense::CMatrix;
use bldl_core::prep::ChannelMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `MᴴM + 0.1·I` for a random `(u+4) × u` matrix `M`.
pub fn random_pd<R: Rng>(rng: &mut R, u: usize) -> CMatrix {
    let m = CMatrix::from_fn(u + 4, u, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    &(&m.adjoint() * &m) + &CMatrix::identity(u).scale(0.1)
}

/// I.i.d. `CN(0, 1)` channel.
pub fn random_channel<R: Rng>(rng: &mut R, b: usize, u: usize) -> ChannelMatrix {
    let g = rand_distr::Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).unwrap();
    let h = CMatrix::from_fn(b, u, |_, _| Complex64::new(rng.sample(g), rng.sample(g)));
    ChannelMatrix::new(h).unwrap()
}

pub fn residual(a: &CMatrix, x: &CMatrix) -> f64 {
    (&(a * x) - &CMatrix::identity(a.rows())).frobenius()
}
pub mod dag;
pub mod calibration;
