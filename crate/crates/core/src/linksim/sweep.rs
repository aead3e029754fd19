use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::channel::{gen_channel_with, ChannelModel};
use super::qam::{demap, Constellation};
use crate::dense::CMatrix;
use crate::prep::{
    gram_regularized, lmmse_equalize, neumann_inverse, normalize_channel, preprocess_inverse,
    reference_inverse, ChannelMatrix, FixedConfig, NoiseConfig, Normalization, Precision, Reference,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preprocessor {
    BldlFloat,
    BldlFixed,
    BldlFixedRd,
    Neumann(usize),
    /// Gauss-Jordan inverse of the regularized Gram matrix.
    Direct,
}

impl std::str::FromStr for Preprocessor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bldl-float" => Ok(Self::BldlFloat),
            "bldl-fixed" => Ok(Self::BldlFixed),
            "bldl-fixed-rd" => Ok(Self::BldlFixedRd),
            "direct" => Ok(Self::Direct),
            _ => s
                .strip_prefix("neumann-")
                .and_then(|k| k.parse().ok())
                .filter(|&k| k >= 1)
                .map(Self::Neumann)
                .ok_or_else(|| Error::Config(format!("unknown preprocessor `{s}`"))),
        }
    }
}

impl std::fmt::Display for Preprocessor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::BldlFloat => f.write_str("bldl-float"),
            Self::BldlFixed => f.write_str("bldl-fixed"),
            Self::BldlFixedRd => f.write_str("bldl-fixed-rd"),
            Self::Neumann(k) => write!(f, "neumann-{k}"),
            Self::Direct => f.write_str("direct"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimation {
    PerfectCsi,
    Ls,
}

impl std::str::FromStr for Estimation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perfect-csi" | "perfect" => Ok(Self::PerfectCsi),
            "ls" => Ok(Self::Ls),
            other => Err(Error::Config(format!("unknown channel estimation `{other}`"))),
        }
    }
}

impl std::fmt::Display for Estimation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::PerfectCsi => "perfect-csi",
            Self::Ls => "ls",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub snr_points_db: Vec<f64>,
    pub trials_per_point: usize,
    pub preprocessor: Preprocessor,
    pub estimation: Estimation,
    pub normalization: Normalization,
    pub fixed: FixedConfig,
    pub es: f64,
    pub seed: u64,
}

impl SweepConfig {
    pub fn new(snr_points_db: Vec<f64>, trials_per_point: usize, preprocessor: Preprocessor, seed: u64) -> Self {
        Self {
            snr_points_db,
            trials_per_point,
            preprocessor,
            estimation: Estimation::PerfectCsi,
            normalization: Normalization::Global,
            fixed: FixedConfig::default(),
            es: 1.0,
            seed,
        }
    }

    /// Noise variance for an SNR of `U·Es/N0`.
    pub fn n0(&self, u: usize, snr_db: f64) -> f64 {
        u as f64 * self.es / 10f64.powf(snr_db / 10.0)
    }

    fn validate(&self) -> Result<()> {
        if self.trials_per_point == 0 {
            return Err(Error::Config("trials_per_point must be at least 1".into()));
        }
        if !(self.es > 0.0) {
            return Err(Error::Config("es must be positive".into()));
        }
        if self.snr_points_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("SNR points must be finite".into()));
        }
        Ok(())
    }
}

/// `y = H·s + n` with circularly-symmetric Gaussian noise of variance `n0`.
pub fn transmit<R: Rng + ?Sized>(s: &[Complex64], h: &CMatrix, n0: f64, rng: &mut R) -> Vec<Complex64> {
    let mut y = h.mul_vec(s);
    if n0 > 0.0 {
        let g = Normal::new(0.0, (n0 / 2.0).sqrt()).expect("finite deviation");
        for v in &mut y {
            *v += Complex64::new(g.sample(rng), g.sample(rng));
        }
    }
    y
}

/// `√(U·Es)·F`, with `F` the unitary DFT: every pilot entry has energy `Es`.
pub fn dft_pilots(u: usize, es: f64) -> CMatrix {
    let a = (es).sqrt();
    CMatrix::from_fn(u, u, |m, n| {
        Complex64::from_polar(a, -2.0 * std::f64::consts::PI * (m * n) as f64 / u as f64)
    })
}

/// Least-squares estimate `Ĥ = Y·P⁻¹` from `B × U` observations `Y = H·P + N`
/// of the `U × U` pilot matrix `P`.
pub fn ls_channel_estimate(pilots: &CMatrix, y: &CMatrix) -> Result<ChannelMatrix> {
    if pilots.rows() != pilots.cols() || y.cols() != pilots.rows() {
        return Err(Error::Dimension(format!(
            "pilots {}×{}, observations {}×{}",
            pilots.rows(),
            pilots.cols(),
            y.rows(),
            y.cols()
        )));
    }
    let p_inv = reference_inverse(pilots)?;
    ChannelMatrix::new(y * &p_inv)
}

/// Per-trial random stream: one ChaCha stream per `(snr_index, trial_index)`.
pub fn trial_rng(seed: u64, snr_index: usize, trial_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((snr_index as u64) << 32) | trial_index as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialOutcome {
    pub bit_errors: u64,
    pub bits: u64,
    pub singular: bool,
}

fn equalizer(
    cfg: &SweepConfig,
    h: &ChannelMatrix,
    noise: &NoiseConfig,
) -> Result<(ChannelMatrix, CMatrix)> {
    match cfg.preprocessor {
        Preprocessor::BldlFloat => preprocess_inverse(h, noise, &Precision::Reference, cfg.normalization),
        Preprocessor::BldlFixed => {
            preprocess_inverse(h, noise, &Precision::Fixed(cfg.fixed.rd(false)), cfg.normalization)
        }
        Preprocessor::BldlFixedRd => {
            preprocess_inverse(h, noise, &Precision::Fixed(cfg.fixed.rd(true)), cfg.normalization)
        }
        Preprocessor::Neumann(k) => {
            let hn = normalize_channel(h, cfg.normalization)?;
            let a = gram_regularized(&Reference::default(), &hn, noise)?;
            let x = neumann_inverse(&a, k)?.to_dense();
            Ok((hn, x))
        }
        Preprocessor::Direct => {
            let hn = normalize_channel(h, cfg.normalization)?;
            let a = gram_regularized(&Reference::default(), &hn, noise)?.to_dense();
            Ok((hn, reference_inverse(&a)?))
        }
    }
}

/// One channel use: draw `H`, optionally estimate it, send random 16-QAM
/// symbols, equalize and count bit errors. The random draws do not depend on
/// the preprocessor, so different backends see identical trials.
pub fn run_trial(
    cfg: &SweepConfig,
    model: &ChannelModel,
    snr_index: usize,
    trial_index: usize,
) -> Result<TrialOutcome> {
    let mut rng = trial_rng(cfg.seed, snr_index, trial_index);
    let h = gen_channel_with(model, &mut rng)?;
    let n0 = cfg.n0(model.u, cfg.snr_points_db[snr_index]);

    let pilot_obs = {
        let p = dft_pilots(model.u, cfg.es);
        let hp = h.entries() * &p;
        let g = Normal::new(0.0, (n0 / 2.0).sqrt()).expect("finite deviation");
        let y = CMatrix::from_fn(hp.rows(), hp.cols(), |r, c| {
            hp[(r, c)] + Complex64::new(g.sample(&mut rng), g.sample(&mut rng))
        });
        (p, y)
    };
    let h_est = match cfg.estimation {
        Estimation::PerfectCsi => h.clone(),
        Estimation::Ls => ls_channel_estimate(&pilot_obs.0, &pilot_obs.1)?,
    };

    let qam = Constellation::qam16(cfg.es);
    let bits: Vec<u8> = (0..model.u * 4).map(|_| rng.gen_range(0..=1u8)).collect();
    let s: Vec<Complex64> = bits.chunks(4).map(|b| qam.map(b)).collect();
    let y = transmit(&s, h.entries(), n0, &mut rng);

    let noise = NoiseConfig::new(n0, cfg.es)?;
    let (hn, a_inv) = match equalizer(cfg, &h_est, &noise) {
        Ok(v) => v,
        Err(Error::SingularBlock { .. }) => {
            return Ok(TrialOutcome {
                singular: true,
                ..TrialOutcome::default()
            })
        }
        Err(e) => return Err(e),
    };
    let s_hat = lmmse_equalize(&a_inv, &hn, &y)?;
    let decided = demap(&s_hat, &qam);
    let bit_errors = decided.iter().zip(&bits).filter(|(a, b)| a != b).count() as u64;
    Ok(TrialOutcome {
        bit_errors,
        bits: bits.len() as u64,
        singular: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerRecord {
    pub snr_db: f64,
    pub bit_errors: u64,
    pub bits_total: u64,
    pub ber: f64,
    pub singular_trials: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub records: Vec<BerRecord>,
}

impl BerCurve {
    pub const CSV_HEADER: &'static str = "snr_db,bit_errors,bits_total,ber,singular_trials";

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{:e},{}",
                r.snr_db, r.bit_errors, r.bits_total, r.ber, r.singular_trials
            );
        }
        s
    }

    /// SNR in dB at which the curve crosses `target`, interpolating
    /// `log10(BER)` linearly between the first bracketing pair of points.
    pub fn snr_at_ber(&self, target: f64) -> Option<f64> {
        self.records.windows(2).find_map(|w| {
            let (a, b) = (&w[0], &w[1]);
            if a.ber >= target && b.ber <= target && a.ber > 0.0 {
                if b.ber == 0.0 || a.ber == b.ber {
                    return Some(b.snr_db);
                }
                let (la, lb, lt) = (a.ber.log10(), b.ber.log10(), target.log10());
                Some(a.snr_db + (la - lt) / (la - lb) * (b.snr_db - a.snr_db))
            } else {
                None
            }
        })
    }
}

/// Sweep metadata as `key=value` lines, written next to the CSV.
pub fn sweep_metadata(cfg: &SweepConfig, model: &ChannelModel) -> String {
    let mut s = String::new();
    let snr: Vec<String> = cfg.snr_points_db.iter().map(|v| v.to_string()).collect();
    for (k, v) in [
        ("preprocessor", cfg.preprocessor.to_string()),
        ("estimation", cfg.estimation.to_string()),
        ("normalization", cfg.normalization.to_string()),
        ("channel", model.kind.to_string()),
        ("b", model.b.to_string()),
        ("u", model.u.to_string()),
        ("min_user_separation_deg", model.min_user_separation_deg.to_string()),
        ("trials_per_point", cfg.trials_per_point.to_string()),
        ("seed", cfg.seed.to_string()),
        ("es", cfg.es.to_string()),
        ("snr_points_db", snr.join(",")),
        ("snr_definition", "U*Es/N0 per receive antenna, unit-energy channel entries".into()),
        ("modulation", "16-QAM Gray, hard decision, uncoded".into()),
        ("pilots", "sqrt(U*Es)*unitary DFT".into()),
        ("word_bits", cfg.fixed.h_fmt.total_bits().to_string()),
    ] {
        let _ = writeln!(s, "{k}={v}");
    }
    s
}

/// Runs `trials_per_point` independent trials at every SNR point in
/// parallel. Trials whose factorization hits a singular block are reported
/// separately and left out of the BER; more than 0.1% of them at any point is
/// an error.
pub fn ber_sweep(cfg: &SweepConfig, model: &ChannelModel) -> Result<BerCurve> {
    cfg.validate()?;
    let mut records = Vec::with_capacity(cfg.snr_points_db.len());
    for (si, &snr_db) in cfg.snr_points_db.iter().enumerate() {
        let outcomes: Vec<TrialOutcome> = (0..cfg.trials_per_point)
            .into_par_iter()
            .map(|ti| run_trial(cfg, model, si, ti))
            .collect::<Result<_>>()?;
        let singular = outcomes.iter().filter(|o| o.singular).count() as u64;
        if singular as f64 > 0.001 * cfg.trials_per_point as f64 {
            return Err(Error::TooManySingular {
                singular: singular as usize,
                trials: cfg.trials_per_point,
            });
        }
        let bit_errors = outcomes.iter().map(|o| o.bit_errors).sum();
        let bits_total: u64 = outcomes.iter().map(|o| o.bits).sum();
        records.push(BerRecord {
            snr_db,
            bit_errors,
            bits_total,
            ber: if bits_total == 0 { 0.0 } else { bit_errors as f64 / bits_total as f64 },
            singular_trials: singular,
        });
    }
    Ok(BerCurve { records })
}
