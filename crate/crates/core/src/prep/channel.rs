use num_complex::Complex64;

use crate::dense::CMatrix;
use crate::fxp::{ComplexFixed, FxFormat};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    PerRow,
    Global,
    None,
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "row" | "per-row" => Ok(Self::PerRow),
            "global" => Ok(Self::Global),
            "none" => Ok(Self::None),
            other => Err(Error::Config(format!("unknown normalization `{other}`"))),
        }
    }
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::PerRow => "row",
            Self::Global => "global",
            Self::None => "none",
        })
    }
}

/// Noise variance `N0` per entry and symbol energy `Es`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub n0: f64,
    pub es: f64,
}

impl NoiseConfig {
    pub fn new(n0: f64, es: f64) -> Result<Self> {
        if !(n0 >= 0.0) || !(es > 0.0) {
            return Err(Error::Config(format!("need n0 >= 0 and es > 0, got {n0}, {es}")));
        }
        Ok(Self { n0, es })
    }

    /// Noise config with `N0/Es = rho` and unit symbol energy.
    pub fn from_rho(rho: f64) -> Result<Self> {
        Self::new(rho, 1.0)
    }

    pub fn rho(&self) -> f64 {
        self.n0 / self.es
    }
}

/// `B × U` channel matrix. `entries · row_scales` recovers the channel the
/// matrix was normalized from.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    entries: CMatrix,
    row_scales: Vec<f64>,
    normalization: Normalization,
}

impl ChannelMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        let (b, u) = (entries.rows(), entries.cols());
        if u == 0 || u % 2 != 0 {
            return Err(Error::Dimension(format!("U = {u} must be even and positive")));
        }
        if b < u {
            return Err(Error::Dimension(format!("B = {b} must be at least U = {u}")));
        }
        Ok(Self {
            entries,
            row_scales: vec![1.0; b],
            normalization: Normalization::None,
        })
    }

    pub fn b(&self) -> usize {
        self.entries.rows()
    }

    pub fn u(&self) -> usize {
        self.entries.cols()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn row_scales(&self) -> &[f64] {
        &self.row_scales
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn reconstruct(&self) -> CMatrix {
        CMatrix::from_fn(self.b(), self.u(), |r, c| self.entries[(r, c)] * self.row_scales[r])
    }

    /// Regularizer for the normalized system that corresponds to `rho` on the
    /// original channel.
    pub fn effective_rho(&self, rho: f64) -> f64 {
        let mean_sq =
            self.row_scales.iter().map(|s| s * s).sum::<f64>() / self.row_scales.len() as f64;
        rho / mean_sq
    }

    /// Applies the row normalization to a received vector.
    pub fn scale_received(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        if y.len() != self.b() {
            return Err(Error::Dimension(format!(
                "received vector has {} entries, channel has {} rows",
                y.len(),
                self.b()
            )));
        }
        Ok(y.iter().zip(&self.row_scales).map(|(v, s)| v / s).collect())
    }

    /// Row-major fixed-point image of the entries.
    pub fn quantize(&self, fmt: FxFormat) -> Result<Vec<ComplexFixed>> {
        let limit = fmt.max_value() + fmt.lsb();
        if self.entries.max_abs_part() > limit {
            return Err(Error::Config(
                "fixed-point input must be normalized into the input format's range".into(),
            ));
        }
        self.entries
            .as_slice()
            .iter()
            .map(|z| ComplexFixed::quantize(*z, fmt).map_err(Error::from))
            .collect()
    }
}

/// Rescales the entries so the largest real or imaginary part is one,
/// either per row or over the whole matrix.
pub fn normalize_channel(h: &ChannelMatrix, mode: Normalization) -> Result<ChannelMatrix> {
    let (b, u) = (h.b(), h.u());
    let scales: Vec<f64> = match mode {
        Normalization::None => vec![1.0; b],
        Normalization::Global => {
            let m = h.entries.max_abs_part();
            if m == 0.0 {
                return Err(Error::DegenerateRow { row: 0 });
            }
            vec![m; b]
        }
        Normalization::PerRow => (0..b)
            .map(|r| {
                let m = h
                    .entries
                    .row(r)
                    .iter()
                    .map(|z| z.re.abs().max(z.im.abs()))
                    .fold(0.0, f64::max);
                if m == 0.0 {
                    Err(Error::DegenerateRow { row: r })
                } else {
                    Ok(m)
                }
            })
            .collect::<Result<_>>()?,
    };
    let entries = CMatrix::from_fn(b, u, |r, c| h.entries[(r, c)] / scales[r]);
    Ok(ChannelMatrix {
        entries,
        row_scales: scales.iter().zip(&h.row_scales).map(|(s, t)| s * t).collect(),
        normalization: mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn per_row_example() {
        let m = CMatrix::from_vec(2, 2, vec![c(0.5, 0.0), c(0.0, -0.25), c(2.0, 1.0), c(0.0, 4.0)]);
        let h = ChannelMatrix::new(m).unwrap();
        let n = normalize_channel(&h, Normalization::PerRow).unwrap();
        assert_eq!(n.entries()[(0, 0)], c(1.0, 0.0));
        assert_eq!(n.entries()[(0, 1)], c(0.0, -0.5));
        assert_eq!(n.row_scales(), &[0.5, 4.0]);
        for r in 0..2 {
            let m = n.entries().row(r).iter().map(|z| z.re.abs().max(z.im.abs())).fold(0.0, f64::max);
            assert_eq!(m, 1.0);
        }
    }

    #[test]
    fn global_example() {
        let m = CMatrix::from_vec(2, 2, vec![c(2.0, 0.0), c(0.0, -1.0), c(1.0, 1.0), c(0.5, 0.0)]);
        let h = ChannelMatrix::new(m.clone()).unwrap();
        let n = normalize_channel(&h, Normalization::Global).unwrap();
        assert_eq!(n.entries(), &m.scale(0.5));
        assert_eq!(n.row_scales(), &[2.0, 2.0]);
        let same = normalize_channel(&h, Normalization::None).unwrap();
        assert_eq!(same.entries(), &m);
    }

    #[test]
    fn per_row_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let m = CMatrix::from_fn(8, 4, |_, _| c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)));
        let h = ChannelMatrix::new(m.clone()).unwrap();
        let n = normalize_channel(&h, Normalization::PerRow).unwrap();
        assert!(n.reconstruct().rel_error(&m) < 1e-15);
    }

    #[test]
    fn zero_row_is_degenerate() {
        let m = CMatrix::from_vec(2, 2, vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let h = ChannelMatrix::new(m).unwrap();
        assert!(matches!(
            normalize_channel(&h, Normalization::PerRow),
            Err(Error::DegenerateRow { row: 1 })
        ));
    }

    #[test]
    fn shape_checks() {
        assert!(ChannelMatrix::new(CMatrix::zeros(4, 3)).is_err());
        assert!(ChannelMatrix::new(CMatrix::zeros(2, 4)).is_err());
    }
}
