use num_complex::Complex64;

use super::channel::ChannelMatrix;
use crate::dense::CMatrix;
use crate::{Error, Result};

/// `ŝ = A⁻¹ · H^H · y'`, where `y'` is `y` with the channel's row
/// normalization applied so it matches the normalized `H` that `A⁻¹` came from.
pub fn lmmse_equalize(a_inv: &CMatrix, h: &ChannelMatrix, y: &[Complex64]) -> Result<Vec<Complex64>> {
    let u = h.u();
    if a_inv.rows() != u || a_inv.cols() != u {
        return Err(Error::Dimension(format!(
            "inverse is {}×{}, channel has {u} users",
            a_inv.rows(),
            a_inv.cols()
        )));
    }
    let y = h.scale_received(y)?;
    let e = h.entries();
    let mf: Vec<Complex64> = (0..u)
        .map(|c| (0..h.b()).map(|r| e[(r, c)].conj() * y[r]).sum())
        .collect();
    Ok(a_inv.mul_vec(&mf))
}
