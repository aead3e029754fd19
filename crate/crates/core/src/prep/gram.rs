use num_complex::Complex64;

use super::block::{Block2, BlockHermitianMatrix};
use super::channel::{ChannelMatrix, NoiseConfig};
use super::engine::{BlockEngine, FixedConfig};
use crate::fxp::{cmac, quantize, ComplexFixed, FxFormat, WideComplex};
use crate::Result;

/// `A = H^H H + (N0/Es)·I` as upper-triangular 2×2 blocks. `h` is the
/// normalized channel; the regularizer is adjusted for its row scales.
pub fn gram_regularized<E: BlockEngine>(
    engine: &E,
    h: &ChannelMatrix,
    noise: &NoiseConfig,
) -> Result<BlockHermitianMatrix<E::Scalar>> {
    engine.gram(h, h.effective_rho(noise.rho()))
}

pub(crate) fn gram_reference(h: &ChannelMatrix, rho: f64) -> BlockHermitianMatrix<Complex64> {
    let (b, u) = (h.b(), h.u());
    let e = h.entries();
    let g = |m: usize, n: usize| -> Complex64 {
        let s: Complex64 = (0..b).map(|j| e[(j, m)].conj() * e[(j, n)]).sum();
        if m == n {
            Complex64::new(s.re + rho, 0.0)
        } else {
            s
        }
    };
    let n = u / 2;
    let mut blocks = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            let (r, c) = (2 * i, 2 * j);
            let lower = if i == j { g(r, c + 1).conj() } else { g(r + 1, c) };
            blocks.push(Block2::new(g(r, c), g(r, c + 1), lower, g(r + 1, c + 1)));
        }
    }
    BlockHermitianMatrix::from_upper(n, blocks, 0)
}

/// Exact Gram accumulators `Σ_j conj(h_jm)·h_jn` (+ rho on the diagonal),
/// row-major `U × U`; only `m ≤ n` entries are computed.
pub fn gram_fixed_accumulators(
    hq: &[ComplexFixed],
    b: usize,
    u: usize,
    rho: f64,
    cfg: &FixedConfig,
) -> Result<Vec<WideComplex>> {
    let zero = WideComplex::zero(cfg.gram_frac(), cfg.gram_acc_bits(b));
    let reg = quantize(rho, FxFormat::new(64, cfg.gram_frac())?)?;
    let mut acc = vec![zero; u * u];
    for m in 0..u {
        for n in m..u {
            let mut s = zero;
            for j in 0..b {
                s = cmac(s, hq[j * u + n], hq[j * u + m], true)?;
            }
            if m == n {
                s = s.add_real(reg)?;
            }
            acc[m * u + n] = s;
        }
    }
    Ok(acc)
}

/// Rounds Gram accumulators into the register-array word with a shared
/// block exponent `e` chosen so the largest part of `A·2^-e` is at most one.
pub fn pack_gram(
    u: usize,
    acc: impl Fn(usize, usize) -> WideComplex,
    cfg: &FixedConfig,
) -> BlockHermitianMatrix<ComplexFixed> {
    let frac = cfg.gram_frac() as i32;
    let mut peak: u128 = 0;
    for m in 0..u {
        for n in m..u {
            let (re, im) = acc(m, n).raw();
            peak = peak.max(re.unsigned_abs()).max(im.unsigned_abs());
        }
    }
    let exp = if peak == 0 {
        0
    } else {
        (u128::BITS - (peak - 1).leading_zeros()) as i32 - frac
    };
    let fmt = cfg.a_fmt;
    let word = |m: usize, n: usize| {
        let (re, im) = acc(m, n).raw();
        ComplexFixed::from_scaled(re, im, frac + exp, fmt)
    };
    let n = u / 2;
    let mut blocks = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            let (r, c) = (2 * i, 2 * j);
            let lower = if i == j { word(r, c + 1).conj() } else { word(r + 1, c) };
            blocks.push(Block2::new(word(r, c), word(r, c + 1), lower, word(r + 1, c + 1)));
        }
    }
    BlockHermitianMatrix::from_upper(n, blocks, exp)
}
