use super::backsub::{backward_substitute, InverseMatrix};
use super::bldl::{bldl_factorize, BldlFactors};
use super::block::BlockHermitianMatrix;
use super::channel::{normalize_channel, ChannelMatrix, NoiseConfig, Normalization};
use super::engine::{BlockEngine, FixedConfig, FixedEngine, Reference};
use super::gram::gram_regularized;
use crate::dense::CMatrix;
use crate::Result;

/// Arithmetic used for a preprocessing run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Precision {
    Reference,
    Fixed(FixedConfig),
}

/// Everything one preprocessing run produces. `inverse` is the inverse of the
/// regularized Gram matrix of the normalized `channel`.
#[derive(Debug, Clone)]
pub struct Preprocessed<T> {
    pub channel: ChannelMatrix,
    pub rho: f64,
    pub gram: BlockHermitianMatrix<T>,
    pub factors: BldlFactors<T>,
    pub inverse: InverseMatrix<T>,
}

impl<T: Copy + super::ToComplex64> Preprocessed<T> {
    /// `A⁻¹` of the un-normalized system. Exact for global and no
    /// normalization; for per-row scaling it is the inverse of the modified
    /// system scaled by the mean squared row scale.
    pub fn original_inverse(&self) -> CMatrix {
        let s = self.channel.row_scales();
        let mean_sq = s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64;
        self.inverse.to_dense().scale(1.0 / mean_sq)
    }
}

/// normalize → regularized Gram → BLDL → backward substitution.
pub fn preprocess<E: BlockEngine>(
    engine: &E,
    h: &ChannelMatrix,
    noise: &NoiseConfig,
    normalization: Normalization,
) -> Result<Preprocessed<E::Scalar>> {
    let channel = normalize_channel(h, normalization)?;
    let gram = gram_regularized(engine, &channel, noise)?;
    let factors = bldl_factorize(engine, &gram)?;
    let inverse = backward_substitute(engine, &factors);
    Ok(Preprocessed {
        rho: channel.effective_rho(noise.rho()),
        channel,
        gram,
        factors,
        inverse,
    })
}

/// Runs [`preprocess`] with the engine selected by `precision` and returns the
/// normalized channel with the inverse in double precision, ready for
/// [`lmmse_equalize`](super::lmmse_equalize).
pub fn preprocess_inverse(
    h: &ChannelMatrix,
    noise: &NoiseConfig,
    precision: &Precision,
    normalization: Normalization,
) -> Result<(ChannelMatrix, CMatrix)> {
    match precision {
        Precision::Reference => {
            let rd = Reference { rd_mode: false };
            let p = preprocess(&rd, h, noise, normalization)?;
            let x = p.inverse.to_dense();
            Ok((p.channel, x))
        }
        Precision::Fixed(cfg) => {
            let p = preprocess(&FixedEngine::new(*cfg), h, noise, normalization)?;
            let x = p.inverse.to_dense();
            Ok((p.channel, x))
        }
    }
}
