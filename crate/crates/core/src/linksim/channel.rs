use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dense::CMatrix;
use crate::prep::ChannelMatrix;
use crate::{Error, Result};

/// Users of the geometric model are placed in `[-HALF_SPAN_DEG, HALF_SPAN_DEG]`.
pub const HALF_SPAN_DEG: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    IidRayleigh,
    GeometricLos,
}

impl std::str::FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid-rayleigh" | "iid" => Ok(Self::IidRayleigh),
            "geometric-los" | "los" => Ok(Self::GeometricLos),
            other => Err(Error::Config(format!("unknown channel model `{other}`"))),
        }
    }
}

impl std::fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::IidRayleigh => "iid-rayleigh",
            Self::GeometricLos => "geometric-los",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub kind: ChannelKind,
    pub b: usize,
    pub u: usize,
    pub min_user_separation_deg: f64,
    pub seed: u64,
}

impl ChannelModel {
    pub fn iid(b: usize, u: usize, seed: u64) -> Self {
        Self {
            kind: ChannelKind::IidRayleigh,
            b,
            u,
            min_user_separation_deg: 1.0,
            seed,
        }
    }

    pub fn los(b: usize, u: usize, min_user_separation_deg: f64, seed: u64) -> Self {
        Self {
            kind: ChannelKind::GeometricLos,
            b,
            u,
            min_user_separation_deg,
            seed,
        }
    }
}

/// Draws a channel from the model's own seed.
pub fn gen_channel(model: &ChannelModel) -> Result<ChannelMatrix> {
    gen_channel_with(model, &mut ChaCha8Rng::seed_from_u64(model.seed))
}

pub fn gen_channel_with<R: Rng + ?Sized>(model: &ChannelModel, rng: &mut R) -> Result<ChannelMatrix> {
    let entries = match model.kind {
        ChannelKind::IidRayleigh => {
            let g = Normal::new(0.0, FRAC_1_SQRT_2).expect("valid deviation");
            CMatrix::from_fn(model.b, model.u, |_, _| Complex64::new(g.sample(rng), g.sample(rng)))
        }
        ChannelKind::GeometricLos => {
            let angles = los_angles(model, rng)?;
            let phases: Vec<f64> = (0..model.u).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
            CMatrix::from_fn(model.b, model.u, |b, k| {
                let theta = angles[k].to_radians();
                Complex64::from_polar(1.0, phases[k] - PI * b as f64 * theta.sin())
            })
        }
    };
    ChannelMatrix::new(entries)
}

/// User angles in degrees with every pair at least the minimum separation
/// apart: sorted uniform slack is distributed between the users, then the
/// angles are shuffled across users.
pub fn los_angles<R: Rng + ?Sized>(model: &ChannelModel, rng: &mut R) -> Result<Vec<f64>> {
    let (u, sep) = (model.u, model.min_user_separation_deg);
    let span = 2.0 * HALF_SPAN_DEG;
    let slack = span - (u.saturating_sub(1)) as f64 * sep;
    if !(sep >= 0.0) || slack < 0.0 {
        return Err(Error::Placement {
            users: u,
            min_sep_deg: sep,
            half_span_deg: HALF_SPAN_DEG,
        });
    }
    let mut offsets: Vec<f64> = (0..u).map(|_| rng.gen_range(0.0..=slack)).collect();
    offsets.sort_by(f64::total_cmp);
    let mut angles: Vec<f64> = offsets
        .iter()
        .enumerate()
        .map(|(k, o)| -HALF_SPAN_DEG + o + k as f64 * sep)
        .collect();
    angles.shuffle(rng);
    Ok(angles)
}
