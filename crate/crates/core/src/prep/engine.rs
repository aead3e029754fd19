use num_complex::Complex64;

use super::block::{Block2, BlockHermitianMatrix, Conj, ToComplex64};
use super::channel::ChannelMatrix;
use super::gram::{gram_fixed_accumulators, gram_reference, pack_gram};
use crate::fxp::{cmul_raw, ComplexFixed, Fx, FxFormat, NrReciprocal, WideComplex, WORD_BITS};
use crate::{Error, Result};

/// Arithmetic of the four BLDL units and of a backward-substitution PE.
///
/// The algorithms in this module are written once against this trait, so
/// the double-precision and fixed-point paths share their control flow and
/// the architecture model can drive the same unit operations cycle by cycle.
pub trait BlockEngine: Sync {
    type Scalar: Copy + Conj + ToComplex64 + PartialEq + std::fmt::Debug + Send + Sync;
    type PeAcc: Copy;

    fn rd_mode(&self) -> bool;

    /// Upper blocks of `H^H H + rho·I` for an already normalized `H`.
    fn gram(&self, h: &ChannelMatrix, rho: f64) -> Result<BlockHermitianMatrix<Self::Scalar>>;

    /// MMAC: `acc + l_ik · d_kk · l_jk^H`.
    fn mmac(
        &self,
        acc: Option<&Block2<Self::Scalar>>,
        l_ik: &Block2<Self::Scalar>,
        d_kk: &Block2<Self::Scalar>,
        l_jk: &Block2<Self::Scalar>,
    ) -> Block2<Self::Scalar>;

    /// MSUB: `a − s`.
    fn msub(&self, a: &Block2<Self::Scalar>, s: &Block2<Self::Scalar>) -> Block2<Self::Scalar>;

    /// MINV: inverse of a Hermitian block. On failure returns the real part
    /// of the determinant.
    fn minv(&self, d: &Block2<Self::Scalar>) -> std::result::Result<Block2<Self::Scalar>, f64>;

    /// MMULT: `w · dinv`.
    fn mmult(&self, w: &Block2<Self::Scalar>, dinv: &Block2<Self::Scalar>) -> Block2<Self::Scalar>;

    /// Loads a PE accumulator with a right-hand-side entry (zero if `None`).
    fn pe_init(&self, rhs: Option<Self::Scalar>) -> Self::PeAcc;

    /// `acc − conj(l) · x`.
    fn pe_mac(&self, acc: Self::PeAcc, l: Self::Scalar, x: Self::Scalar) -> Self::PeAcc;

    fn pe_finish(&self, acc: Self::PeAcc) -> Self::Scalar;

    /// Exponent that maps stored inverse entries to the represented inverse,
    /// given the Gram matrix exponent.
    fn inverse_scale_exp(&self, gram_exp: i32) -> i32 {
        -gram_exp
    }
}

/// `Δ = a·d − b·b*`; with `rd_mode` the imaginary part is dropped.
pub fn det2x2(d: &Block2<Complex64>, rd_mode: bool) -> Complex64 {
    let [[a, b], [_, dd]] = d.m;
    let delta = a * dd - b * b.conj();
    if rd_mode {
        Complex64::new(delta.re, 0.0)
    } else {
        delta
    }
}

fn inv2x2_ref(d: &Block2<Complex64>, rd_mode: bool) -> std::result::Result<Block2<Complex64>, f64> {
    let [[a, b], [_, dd]] = d.m;
    let (a, dd) = if rd_mode {
        (Complex64::new(a.re, 0.0), Complex64::new(dd.re, 0.0))
    } else {
        (a, dd)
    };
    let delta = det2x2(&Block2::new(a, b, b.conj(), dd), rd_mode);
    let scale = a.norm() * dd.norm();
    if !(delta.re > 1e-13 * scale) || !delta.re.is_finite() {
        return Err(delta.re);
    }
    let r = delta.inv();
    Ok(Block2::new(dd * r, -b * r, -b.conj() * r, a * r))
}

/// `(1/Δ)·[[d, −b], [−b*, a]]` in double precision. A failure reports
/// block index 1.
pub fn inv2x2_hermitian(d: &Block2<Complex64>, rd_mode: bool) -> Result<Block2<Complex64>> {
    inv2x2_ref(d, rd_mode).map_err(|delta| Error::SingularBlock {
        block: 1,
        delta,
        cycle: None,
    })
}

/// Double-precision engine.
#[derive(Debug, Clone, Copy, Default)]
pub struct Reference {
    pub rd_mode: bool,
}

impl BlockEngine for Reference {
    type Scalar = Complex64;
    type PeAcc = Complex64;

    fn rd_mode(&self) -> bool {
        self.rd_mode
    }

    fn gram(&self, h: &ChannelMatrix, rho: f64) -> Result<BlockHermitianMatrix<Complex64>> {
        Ok(gram_reference(h, rho))
    }

    fn mmac(
        &self,
        acc: Option<&Block2<Complex64>>,
        l_ik: &Block2<Complex64>,
        d_kk: &Block2<Complex64>,
        l_jk: &Block2<Complex64>,
    ) -> Block2<Complex64> {
        let t = l_ik.mul(d_kk).mul(&l_jk.adjoint());
        match acc {
            Some(s) => s.add(&t),
            None => t,
        }
    }

    fn msub(&self, a: &Block2<Complex64>, s: &Block2<Complex64>) -> Block2<Complex64> {
        a.sub(s)
    }

    fn minv(&self, d: &Block2<Complex64>) -> std::result::Result<Block2<Complex64>, f64> {
        inv2x2_ref(d, self.rd_mode)
    }

    fn mmult(&self, w: &Block2<Complex64>, dinv: &Block2<Complex64>) -> Block2<Complex64> {
        w.mul(dinv)
    }

    fn pe_init(&self, rhs: Option<Complex64>) -> Complex64 {
        rhs.unwrap_or_default()
    }

    fn pe_mac(&self, acc: Complex64, l: Complex64, x: Complex64) -> Complex64 {
        acc - l.conj() * x
    }

    fn pe_finish(&self, acc: Complex64) -> Complex64 {
        acc
    }

    fn inverse_scale_exp(&self, _gram_exp: i32) -> i32 {
        0
    }
}

/// Widths of the fixed-point datapath. Every stored quantity is one word
/// per real/imaginary part; only the integer/fraction split differs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedConfig {
    /// Normalized channel entries, `Q1.(w−1)`.
    pub h_fmt: FxFormat,
    /// Gram matrix after the block exponent, `D` blocks and MMAC/MSUB results.
    pub a_fmt: FxFormat,
    pub l_fmt: FxFormat,
    pub dinv_fmt: FxFormat,
    pub x_fmt: FxFormat,
    /// Fractional bits of `1/Δ` inside MINV.
    pub recip_frac: u32,
    pub nr: NrReciprocal,
    pub rd_mode: bool,
}

impl Default for FixedConfig {
    fn default() -> Self {
        Self::with_word_bits(WORD_BITS).expect("default word width is valid")
    }
}

impl FixedConfig {
    pub fn with_word_bits(w: u32) -> Result<Self> {
        if !(8..=32).contains(&w) {
            return Err(Error::Config(format!("word width {w} outside 8..=32")));
        }
        Ok(Self {
            h_fmt: FxFormat::q(1, w - 1)?,
            a_fmt: FxFormat::q(2, w - 2)?,
            l_fmt: FxFormat::q(4, w - 4)?,
            dinv_fmt: FxFormat::q(6, w - 6)?,
            x_fmt: FxFormat::q(6, w - 6)?,
            recip_frac: 30,
            nr: NrReciprocal::default(),
            rd_mode: false,
        })
    }

    pub fn rd(mut self, rd_mode: bool) -> Self {
        self.rd_mode = rd_mode;
        self
    }

    /// Fractional bits of the Gram accumulators (exact products of two inputs).
    pub fn gram_frac(&self) -> u32 {
        2 * self.h_fmt.frac_bits()
    }

    /// Gram accumulator width for `b` accumulated products.
    pub fn gram_acc_bits(&self, b: usize) -> u32 {
        2 * self.h_fmt.total_bits() + ceil_log2(b) + 2
    }
}

pub(crate) fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

type RawBlock = [[(i128, i128); 2]; 2];

fn raw_block(b: &Block2<ComplexFixed>) -> RawBlock {
    let f = |z: ComplexFixed| (z.re.raw() as i128, z.im.raw() as i128);
    [[f(b.m[0][0]), f(b.m[0][1])], [f(b.m[1][0]), f(b.m[1][1])]]
}

fn raw_adjoint(b: &RawBlock) -> RawBlock {
    let c = |(re, im): (i128, i128)| (re, -im);
    [[c(b[0][0]), c(b[1][0])], [c(b[0][1]), c(b[1][1])]]
}

fn raw_matmul(x: &RawBlock, y: &RawBlock) -> RawBlock {
    let mut out = [[(0, 0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            let p = cmul_raw(x[r][0].0, x[r][0].1, y[0][c].0, y[0][c].1);
            let q = cmul_raw(x[r][1].0, x[r][1].1, y[1][c].0, y[1][c].1);
            out[r][c] = (p.0 + q.0, p.1 + q.1);
        }
    }
    out
}

fn round_block(b: &RawBlock, from_frac: u32, fmt: FxFormat) -> Block2<ComplexFixed> {
    let f = |(re, im): (i128, i128)| ComplexFixed::from_scaled(re, im, from_frac as i32, fmt);
    Block2::new(f(b[0][0]), f(b[0][1]), f(b[1][0]), f(b[1][1]))
}

fn frac_of(b: &Block2<ComplexFixed>) -> u32 {
    b.m[0][0].frac_bits()
}

/// Bit-accurate fixed-point engine.
#[derive(Debug, Clone, Copy, Default)]
pub struct FixedEngine {
    pub cfg: FixedConfig,
}

impl FixedEngine {
    pub fn new(cfg: FixedConfig) -> Self {
        Self { cfg }
    }

    /// Width of the backward-substitution PE accumulator. Products of two
    /// words summed over at most a few hundred terms stay far inside it.
    const PE_ACC_BITS: u32 = 120;
}

impl BlockEngine for FixedEngine {
    type Scalar = ComplexFixed;
    type PeAcc = WideComplex;

    fn rd_mode(&self) -> bool {
        self.cfg.rd_mode
    }

    fn gram(&self, h: &ChannelMatrix, rho: f64) -> Result<BlockHermitianMatrix<ComplexFixed>> {
        let hq = h.quantize(self.cfg.h_fmt)?;
        let u = h.u();
        let acc = gram_fixed_accumulators(&hq, h.b(), u, rho, &self.cfg)?;
        Ok(pack_gram(u, |m, n| acc[m * u + n], &self.cfg))
    }

    fn mmac(
        &self,
        acc: Option<&Block2<ComplexFixed>>,
        l_ik: &Block2<ComplexFixed>,
        d_kk: &Block2<ComplexFixed>,
        l_jk: &Block2<ComplexFixed>,
    ) -> Block2<ComplexFixed> {
        let a_fmt = self.cfg.a_fmt;
        // stage 1: L_ik·D_kk rounded to the storage word
        let p = raw_matmul(&raw_block(l_ik), &raw_block(d_kk));
        let p = round_block(&p, frac_of(l_ik) + frac_of(d_kk), a_fmt);
        // stage 2: exact product with L_jk^H plus accumulator, rounded once
        let frac = a_fmt.frac_bits() + frac_of(l_jk);
        let mut q = raw_matmul(&raw_block(&p), &raw_adjoint(&raw_block(l_jk)));
        if let Some(s) = acc {
            let shift = frac - frac_of(s);
            let s = raw_block(s);
            for r in 0..2 {
                for c in 0..2 {
                    q[r][c].0 += s[r][c].0 << shift;
                    q[r][c].1 += s[r][c].1 << shift;
                }
            }
        }
        round_block(&q, frac, a_fmt)
    }

    fn msub(&self, a: &Block2<ComplexFixed>, s: &Block2<ComplexFixed>) -> Block2<ComplexFixed> {
        debug_assert_eq!(frac_of(a), frac_of(s));
        let (a, s) = (raw_block(a), raw_block(s));
        let mut d = [[(0, 0); 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                d[r][c] = (a[r][c].0 - s[r][c].0, a[r][c].1 - s[r][c].1);
            }
        }
        round_block(&d, self.cfg.a_fmt.frac_bits(), self.cfg.a_fmt)
    }

    fn minv(&self, d: &Block2<ComplexFixed>) -> std::result::Result<Block2<ComplexFixed>, f64> {
        let cfg = &self.cfg;
        let fa = frac_of(d);
        let [[a, b], [_, dd]] = raw_block(d);
        let (a, dd) = if cfg.rd_mode {
            ((a.0, 0), (dd.0, 0))
        } else {
            (a, dd)
        };
        let ad = cmul_raw(a.0, a.1, dd.0, dd.1);
        let delta = (ad.0 - (b.0 * b.0 + b.1 * b.1), ad.1);
        let delta_frac = 2 * fa;
        let delta_re = delta.0 as f64 * (-(delta_frac as f64)).exp2();
        if delta_re < cfg.nr.singular_threshold {
            return Err(delta_re);
        }
        let rfmt = FxFormat::new(64, cfg.recip_frac).map_err(|_| delta_re)?;
        // 1/Δ at recip_frac fractional bits
        let r: (i128, i128) = if cfg.rd_mode {
            let x = Fx::from_scaled(delta.0, delta_frac as i32, FxFormat::new(64, delta_frac).map_err(|_| delta_re)?);
            let y = cfg.nr.reciprocal(x, rfmt).map_err(|_| delta_re)?;
            (y.raw() as i128, 0)
        } else {
            // complex Δ: 1/Δ = conj(Δ) · 1/|Δ|²
            let mag_frac = 60;
            let mag = Fx::from_scaled(
                delta.0 * delta.0 + delta.1 * delta.1,
                2 * delta_frac as i32,
                FxFormat::new(64, mag_frac).map_err(|_| delta_re)?,
            );
            let inv_frac = cfg.recip_frac - 2;
            let nr = NrReciprocal {
                singular_threshold: cfg.nr.singular_threshold * cfg.nr.singular_threshold,
                ..cfg.nr
            };
            let inv_mag = nr
                .reciprocal(mag, FxFormat::new(64, inv_frac).map_err(|_| delta_re)?)
                .map_err(|_| delta_re)?;
            let from = (delta_frac + inv_frac) as i32;
            let m = inv_mag.raw() as i128;
            (
                rfmt.rescale(delta.0 * m, from) as i128,
                rfmt.rescale(-delta.1 * m, from) as i128,
            )
        };
        let adj: RawBlock = [[dd, (-b.0, -b.1)], [(-b.0, b.1), a]];
        let mut out = [[(0, 0); 2]; 2];
        for row in 0..2 {
            for col in 0..2 {
                let e = adj[row][col];
                out[row][col] = cmul_raw(e.0, e.1, r.0, r.1);
            }
        }
        Ok(round_block(&out, fa + cfg.recip_frac, cfg.dinv_fmt))
    }

    fn mmult(&self, w: &Block2<ComplexFixed>, dinv: &Block2<ComplexFixed>) -> Block2<ComplexFixed> {
        let p = raw_matmul(&raw_block(w), &raw_block(dinv));
        round_block(&p, frac_of(w) + frac_of(dinv), self.cfg.l_fmt)
    }

    fn pe_init(&self, rhs: Option<ComplexFixed>) -> WideComplex {
        let frac = self.cfg.l_fmt.frac_bits() + self.cfg.x_fmt.frac_bits();
        let acc = WideComplex::zero(frac, Self::PE_ACC_BITS);
        match rhs {
            Some(v) => acc.add_fixed(v).expect("right-hand side fits the PE accumulator"),
            None => acc,
        }
    }

    fn pe_mac(&self, acc: WideComplex, l: ComplexFixed, x: ComplexFixed) -> WideComplex {
        let (lr, li) = l.raw();
        let (xr, xi) = x.raw();
        let (re, im) = cmul_raw(lr as i128, -(li as i128), xr as i128, xi as i128);
        acc.add_raw(-re, -im, l.frac_bits() + x.frac_bits())
            .expect("PE accumulator is wide enough for any U")
    }

    fn pe_finish(&self, acc: WideComplex) -> ComplexFixed {
        acc.round_to(self.cfg.x_fmt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fxp::quantize;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn example() -> Block2<Complex64> {
        Block2::new(c(2.0, 0.0), c(1.0, 1.0), c(1.0, -1.0), c(3.0, 0.0))
    }

    /// Cofactor expansion of a general 2×2 determinant.
    fn cofactor_det(b: &Block2<Complex64>) -> Complex64 {
        b.m[0][0] * b.m[1][1] - b.m[0][1] * b.m[1][0]
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(det2x2(&Block2::identity(), false), c(1.0, 0.0));
        assert_eq!(det2x2(&example(), false), cofactor_det(&example()));
        assert_eq!(det2x2(&example(), false), c(4.0, 0.0));
        let diag = Block2::new(c(2.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(4.0, 0.0));
        assert_eq!(det2x2(&diag, true), c(10.0, 0.0));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inv2x2_hermitian(&Block2::identity(), false).unwrap(), Block2::identity());
        let diag = Block2::new(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(4.0, 0.0));
        let inv = inv2x2_hermitian(&diag, false).unwrap();
        assert_eq!(inv, Block2::new(c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.25, 0.0)));

        let inv = inv2x2_hermitian(&example(), true).unwrap();
        let expect = Block2::new(c(0.75, 0.0), c(-0.25, -0.25), c(-0.25, 0.25), c(0.5, 0.0));
        assert_eq!(inv, expect);
        let prod = example().mul(&inv);
        let err: f64 = (0..4)
            .map(|k| (prod.m[k / 2][k % 2] - Block2::identity().m[k / 2][k % 2]).norm())
            .sum();
        assert!(err < 1e-12);
    }

    #[test]
    fn singular_block_rejected() {
        let s = Block2::new(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0));
        assert!(matches!(inv2x2_hermitian(&s, false), Err(Error::SingularBlock { .. })));
        let fe = FixedEngine::default();
        let q = s.map(|z| ComplexFixed::quantize(z * 0.5, fe.cfg.a_fmt).unwrap());
        assert!(fe.minv(&q).is_err());
    }

    fn fixed_block(b: &Block2<Complex64>, fmt: FxFormat) -> Block2<ComplexFixed> {
        b.map(|z| ComplexFixed::quantize(z, fmt).unwrap())
    }

    #[test]
    fn fixed_minv_matches_reference() {
        for rd in [false, true] {
            let fe = FixedEngine::new(FixedConfig::default().rd(rd));
            let d = example().map(|z| z * 0.25);
            let fx = fe.minv(&fixed_block(&d, fe.cfg.a_fmt)).unwrap().to_c64();
            let rf = inv2x2_hermitian(&d, rd).unwrap();
            for k in 0..4 {
                let (r, col) = (k / 2, k % 2);
                assert!((fx.m[r][col] - rf.m[r][col]).norm() < 4.0 * fe.cfg.dinv_fmt.lsb());
            }
        }
    }

    #[test]
    fn rd_mode_gives_real_inverse_diagonal() {
        let fe = FixedEngine::new(FixedConfig::default().rd(true));
        let fmt = fe.cfg.a_fmt;
        // diagonal entries carry an imaginary residue
        let tiny = 64.0 * fmt.lsb();
        let d = Block2::new(c(0.5, tiny), c(0.1, 0.2), c(0.1, -0.2), c(0.6, -tiny));
        let inv = fe.minv(&fixed_block(&d, fmt)).unwrap();
        assert_eq!(inv.m[0][0].im.raw(), 0);
        assert_eq!(inv.m[1][1].im.raw(), 0);
        assert_eq!(inv.m[1][0], inv.m[0][1].conj());

        let plain = FixedEngine::new(FixedConfig::default());
        let inv = plain.minv(&fixed_block(&d, fmt)).unwrap();
        assert_ne!(inv.m[0][0].im.raw(), 0);
    }

    #[test]
    fn fixed_mmac_matches_reference() {
        let fe = FixedEngine::default();
        let l = Block2::new(c(0.3, -0.1), c(0.2, 0.05), c(-0.4, 0.3), c(0.1, 0.0));
        let d = Block2::new(c(0.8, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.7, 0.0));
        let s = Block2::new(c(0.01, 0.02), c(-0.03, 0.0), c(0.05, 0.01), c(0.02, 0.0));
        let rf = Reference::default().mmac(Some(&s), &l, &d, &l);
        let fx = fe
            .mmac(
                Some(&fixed_block(&s, fe.cfg.a_fmt)),
                &fixed_block(&l, fe.cfg.l_fmt),
                &fixed_block(&d, fe.cfg.a_fmt),
                &fixed_block(&l, fe.cfg.l_fmt),
            )
            .to_c64();
        for k in 0..4 {
            assert!((fx.m[k / 2][k % 2] - rf.m[k / 2][k % 2]).norm() < 1e-5);
        }
    }

    #[test]
    fn pe_accumulates_negated_conjugate_products() {
        let fe = FixedEngine::default();
        let l = ComplexFixed::quantize(c(0.5, 0.25), fe.cfg.l_fmt).unwrap();
        let x = ComplexFixed::quantize(c(1.0, -2.0), fe.cfg.x_fmt).unwrap();
        let rhs = ComplexFixed::quantize(c(0.125, 0.0), fe.cfg.dinv_fmt).unwrap();
        let acc = fe.pe_mac(fe.pe_init(Some(rhs)), l, x);
        // 0.125 − (0.5 − 0.25i)(1 − 2i) = 0.125 − (0 − 1.25i)
        assert_eq!(fe.pe_finish(acc).to_complex64(), c(0.125, 1.25));
        assert_eq!(quantize(0.125, fe.cfg.x_fmt).unwrap().raw(), fe.pe_finish(acc).re.raw());
    }

    #[test]
    fn gram_accumulator_width() {
        let cfg = FixedConfig::default();
        assert_eq!(cfg.gram_frac(), 40);
        assert_eq!(cfg.gram_acc_bits(64), 50);
        assert_eq!(ceil_log2(64), 6);
        assert_eq!(ceil_log2(65), 7);
        assert_eq!(ceil_log2(1), 0);
    }
}
