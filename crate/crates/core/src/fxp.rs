//! Fixed-point scalar and complex arithmetic.
//!
//! Values are two's-complement integers (`raw`) interpreted as
//! `raw * 2^-frac_bits`. Every conversion into a narrower format goes through
//! [`FxFormat::rescale`], which applies the format's rounding and overflow
//! policy. Products are always formed exactly in `i128` and rounded once.

use num_complex::Complex64;
use thiserror::Error;

/// Storage width of one real or imaginary part at module boundaries.
pub const WORD_BITS: u32 = 21;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FxError {
    #[error("invalid fixed-point format: {total_bits} total bits, {frac_bits} fractional bits")]
    InvalidFormat { total_bits: u32, frac_bits: u32 },
    #[error("cannot quantize NaN")]
    NotANumber,
    #[error("raw value {raw} does not fit in {total_bits}-bit two's complement")]
    RawOutOfRange { raw: i128, total_bits: u32 },
    #[error("real and imaginary parts use different formats")]
    FormatMismatch,
    #[error("accumulator overflow beyond {limit_bits} bits")]
    AccumulatorOverflow { limit_bits: u32 },
    #[error("reciprocal operand {value} is non-positive or below the singularity threshold")]
    Singular { value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rounding {
    NearestEven,
    Truncate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Overflow {
    Saturate,
    Wrap,
}

/// Two's-complement fixed-point format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FxFormat {
    total_bits: u32,
    frac_bits: u32,
    rounding: Rounding,
    overflow: Overflow,
}

impl FxFormat {
    /// Round-to-nearest-even, saturating format.
    pub fn new(total_bits: u32, frac_bits: u32) -> Result<Self, FxError> {
        if !(2..=64).contains(&total_bits) || frac_bits >= total_bits {
            return Err(FxError::InvalidFormat {
                total_bits,
                frac_bits,
            });
        }
        Ok(Self {
            total_bits,
            frac_bits,
            rounding: Rounding::NearestEven,
            overflow: Overflow::Saturate,
        })
    }

    /// `Qm.n` with `m` integer bits (sign included) and `n` fractional bits.
    pub fn q(int_bits: u32, frac_bits: u32) -> Result<Self, FxError> {
        Self::new(int_bits + frac_bits, frac_bits)
    }

    pub fn with_rounding(mut self, rounding: Rounding) -> Self {
        self.rounding = rounding;
        self
    }

    pub fn with_overflow(mut self, overflow: Overflow) -> Self {
        self.overflow = overflow;
        self
    }

    pub fn total_bits(&self) -> u32 {
        self.total_bits
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn rounding(&self) -> Rounding {
        self.rounding
    }

    pub fn overflow(&self) -> Overflow {
        self.overflow
    }

    pub fn max_raw(&self) -> i64 {
        ((1i128 << (self.total_bits - 1)) - 1) as i64
    }

    pub fn min_raw(&self) -> i64 {
        (-(1i128 << (self.total_bits - 1))) as i64
    }

    pub fn lsb(&self) -> f64 {
        (-(self.frac_bits as f64)).exp2()
    }

    pub fn max_value(&self) -> f64 {
        self.max_raw() as f64 * self.lsb()
    }

    pub fn contains_raw(&self, raw: i128) -> bool {
        raw >= self.min_raw() as i128 && raw <= self.max_raw() as i128
    }

    /// Applies the overflow policy to an integer already at this format's scale.
    pub fn fit(&self, raw: i128) -> i64 {
        if self.contains_raw(raw) {
            return raw as i64;
        }
        match self.overflow {
            Overflow::Saturate => raw.clamp(self.min_raw() as i128, self.max_raw() as i128) as i64,
            Overflow::Wrap => {
                let modulus = 1i128 << self.total_bits;
                let mut m = raw.rem_euclid(modulus);
                if m >= modulus >> 1 {
                    m -= modulus;
                }
                m as i64
            }
        }
    }

    /// Converts `raw * 2^-from_frac` into this format: rounding first, then overflow.
    pub fn rescale(&self, raw: i128, from_frac: i32) -> i64 {
        let shift = self.frac_bits as i32 - from_frac;
        let scaled = if shift >= 0 {
            shl_saturating(raw, shift as u32)
        } else {
            shr_round(raw, (-shift) as u32, self.rounding)
        };
        self.fit(scaled)
    }
}

fn shl_saturating(raw: i128, shift: u32) -> i128 {
    if raw == 0 {
        return 0;
    }
    let headroom = if raw > 0 {
        raw.leading_zeros()
    } else {
        raw.leading_ones()
    };
    if shift + 1 < headroom {
        raw << shift
    } else if raw > 0 {
        i128::MAX
    } else {
        i128::MIN
    }
}

/// Divides by `2^shift` with the given rounding.
pub(crate) fn shr_round(raw: i128, shift: u32, rounding: Rounding) -> i128 {
    if shift == 0 {
        return raw;
    }
    if shift >= 127 {
        return match rounding {
            Rounding::Truncate if raw < 0 => -1,
            _ => 0,
        };
    }
    let q = raw >> shift;
    match rounding {
        Rounding::Truncate => q,
        Rounding::NearestEven => {
            let r = raw - (q << shift);
            let half = 1i128 << (shift - 1);
            if r > half || (r == half && q & 1 == 1) {
                q + 1
            } else {
                q
            }
        }
    }
}

/// A real fixed-point value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fx {
    raw: i64,
    fmt: FxFormat,
}

impl Fx {
    pub fn from_raw(raw: i64, fmt: FxFormat) -> Result<Self, FxError> {
        if !fmt.contains_raw(raw as i128) {
            return Err(FxError::RawOutOfRange {
                raw: raw as i128,
                total_bits: fmt.total_bits,
            });
        }
        Ok(Self { raw, fmt })
    }

    /// Builds a value from an integer at `from_frac`, rounding into `fmt`.
    pub fn from_scaled(raw: i128, from_frac: i32, fmt: FxFormat) -> Self {
        Self {
            raw: fmt.rescale(raw, from_frac),
            fmt,
        }
    }

    pub fn zero(fmt: FxFormat) -> Self {
        Self { raw: 0, fmt }
    }

    pub fn raw(&self) -> i64 {
        self.raw
    }

    pub fn format(&self) -> FxFormat {
        self.fmt
    }

    pub fn to_f64(&self) -> f64 {
        self.raw as f64 * self.fmt.lsb()
    }

    pub fn requantize(self, fmt: FxFormat) -> Self {
        Self::from_scaled(self.raw as i128, self.fmt.frac_bits as i32, fmt)
    }

    pub fn neg(self) -> Self {
        Self {
            raw: self.fmt.fit(-(self.raw as i128)),
            fmt: self.fmt,
        }
    }
}

/// Nearest representable value under `fmt`'s rounding and overflow policy.
pub fn quantize(x: f64, fmt: FxFormat) -> Result<Fx, FxError> {
    if x.is_nan() {
        return Err(FxError::NotANumber);
    }
    // Scaling by a power of two is exact, so the only rounding is the one below.
    let scaled = x * (fmt.frac_bits as f64).exp2();
    let rounded = match fmt.rounding {
        Rounding::NearestEven => scaled.round_ties_even(),
        Rounding::Truncate => scaled.floor(),
    };
    Ok(Fx {
        raw: fmt.fit(rounded as i128),
        fmt,
    })
}

/// Complex number with fixed-point parts sharing one format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ComplexFixed {
    pub re: Fx,
    pub im: Fx,
}

impl ComplexFixed {
    pub fn new(re: Fx, im: Fx) -> Result<Self, FxError> {
        if re.fmt != im.fmt {
            return Err(FxError::FormatMismatch);
        }
        Ok(Self { re, im })
    }

    pub fn from_raw(re: i64, im: i64, fmt: FxFormat) -> Result<Self, FxError> {
        Ok(Self {
            re: Fx::from_raw(re, fmt)?,
            im: Fx::from_raw(im, fmt)?,
        })
    }

    pub fn from_scaled(re: i128, im: i128, from_frac: i32, fmt: FxFormat) -> Self {
        Self {
            re: Fx::from_scaled(re, from_frac, fmt),
            im: Fx::from_scaled(im, from_frac, fmt),
        }
    }

    pub fn zero(fmt: FxFormat) -> Self {
        Self {
            re: Fx::zero(fmt),
            im: Fx::zero(fmt),
        }
    }

    pub fn quantize(z: Complex64, fmt: FxFormat) -> Result<Self, FxError> {
        Ok(Self {
            re: quantize(z.re, fmt)?,
            im: quantize(z.im, fmt)?,
        })
    }

    pub fn format(&self) -> FxFormat {
        self.re.fmt
    }

    pub fn frac_bits(&self) -> u32 {
        self.re.fmt.frac_bits
    }

    pub fn raw(&self) -> (i64, i64) {
        (self.re.raw, self.im.raw)
    }

    pub fn conj(self) -> Self {
        Self {
            re: self.re,
            im: self.im.neg(),
        }
    }

    pub fn neg(self) -> Self {
        Self {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn requantize(self, fmt: FxFormat) -> Self {
        Self {
            re: self.re.requantize(fmt),
            im: self.im.requantize(fmt),
        }
    }
}

/// Exact complex product on raw integers with four real multipliers.
pub(crate) fn cmul_raw(ar: i128, ai: i128, br: i128, bi: i128) -> (i128, i128) {
    let rr = ar * br;
    let ii = ai * bi;
    let ri = ar * bi;
    let ir = ai * br;
    (rr - ii, ri + ir)
}

/// `a * b` quantized once to `out`. Operand formats may differ.
pub fn cmul(a: ComplexFixed, b: ComplexFixed, out: FxFormat) -> ComplexFixed {
    let (re, im) = cmul_raw(
        a.re.raw as i128,
        a.im.raw as i128,
        b.re.raw as i128,
        b.im.raw as i128,
    );
    let frac = (a.frac_bits() + b.frac_bits()) as i32;
    ComplexFixed::from_scaled(re, im, frac, out)
}

/// Exact complex accumulator. Never rounds; overflow past `limit_bits`
/// (two's complement, sign included) is reported as an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WideComplex {
    re: i128,
    im: i128,
    frac_bits: u32,
    limit_bits: u32,
}

impl WideComplex {
    pub fn zero(frac_bits: u32, limit_bits: u32) -> Self {
        assert!((2..=127).contains(&limit_bits), "accumulator width out of range");
        Self {
            re: 0,
            im: 0,
            frac_bits,
            limit_bits,
        }
    }

    pub fn raw(&self) -> (i128, i128) {
        (self.re, self.im)
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn limit_bits(&self) -> u32 {
        self.limit_bits
    }

    fn check(&self, v: i128) -> Result<i128, FxError> {
        let bound = 1i128 << (self.limit_bits - 1);
        if v >= -bound && v < bound {
            Ok(v)
        } else {
            Err(FxError::AccumulatorOverflow {
                limit_bits: self.limit_bits,
            })
        }
    }

    fn align(&self, raw: i128, frac: u32) -> Result<i128, FxError> {
        if frac > self.frac_bits {
            return Err(FxError::InvalidFormat {
                total_bits: self.limit_bits,
                frac_bits: frac,
            });
        }
        let shift = self.frac_bits - frac;
        let shifted = raw.checked_mul(1i128 << shift).ok_or(FxError::AccumulatorOverflow {
            limit_bits: self.limit_bits,
        })?;
        self.check(shifted)
    }

    /// Adds an integer pair given at `frac` fractional bits (`frac` ≤ accumulator's).
    pub fn add_raw(self, re: i128, im: i128, frac: u32) -> Result<Self, FxError> {
        let re = self.align(re, frac)?;
        let im = self.align(im, frac)?;
        Ok(Self {
            re: self.check(self.re + re)?,
            im: self.check(self.im + im)?,
            ..self
        })
    }

    pub fn add_fixed(self, x: ComplexFixed) -> Result<Self, FxError> {
        self.add_raw(x.re.raw as i128, x.im.raw as i128, x.frac_bits())
    }

    pub fn add_real(self, x: Fx) -> Result<Self, FxError> {
        self.add_raw(x.raw as i128, 0, x.fmt.frac_bits)
    }

    pub fn round_to(&self, fmt: FxFormat) -> ComplexFixed {
        ComplexFixed::from_scaled(self.re, self.im, self.frac_bits as i32, fmt)
    }

    pub fn to_complex64(&self) -> Complex64 {
        let s = (-(self.frac_bits as f64)).exp2();
        Complex64::new(self.re as f64 * s, self.im as f64 * s)
    }
}

/// `acc + a * b` (or `acc + a * conj(b)` when `conj_b`), without rounding.
pub fn cmac(
    acc: WideComplex,
    a: ComplexFixed,
    b: ComplexFixed,
    conj_b: bool,
) -> Result<WideComplex, FxError> {
    let bi = if conj_b { -b.im.raw } else { b.im.raw };
    let (re, im) = cmul_raw(
        a.re.raw as i128,
        a.im.raw as i128,
        b.re.raw as i128,
        bi as i128,
    );
    acc.add_raw(re, im, a.frac_bits() + b.frac_bits())
}

/// Newton-Raphson reciprocal unit.
///
/// The operand is normalized to `m ∈ [0.5, 1)` by a power-of-two shift,
/// seeded with `48/17 - 32/17·m` and refined with `y ← y(2 − m·y)` at
/// `work_frac` fractional bits. The inverse shift is applied on output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NrReciprocal {
    pub iterations: u32,
    pub work_frac: u32,
    pub singular_threshold: f64,
}

impl Default for NrReciprocal {
    fn default() -> Self {
        Self {
            iterations: 3,
            work_frac: 40,
            singular_threshold: (-16f64).exp2(),
        }
    }
}

impl NrReciprocal {
    pub fn reciprocal(&self, x: Fx, out: FxFormat) -> Result<Fx, FxError> {
        let mut last = Fx::zero(out);
        self.run(x, out, |y| last = y)?;
        Ok(last)
    }

    /// Output after the seed and after each iteration (`iterations + 1` values).
    pub fn trace(&self, x: Fx, out: FxFormat) -> Result<Vec<Fx>, FxError> {
        let mut steps = Vec::with_capacity(self.iterations as usize + 1);
        self.run(x, out, |y| steps.push(y))?;
        Ok(steps)
    }

    fn run(&self, x: Fx, out: FxFormat, mut emit: impl FnMut(Fx)) -> Result<(), FxError> {
        let value = x.to_f64();
        if x.raw <= 0 || value < self.singular_threshold {
            return Err(FxError::Singular { value });
        }
        let w = self.work_frac;
        let bitlen = 64 - (x.raw as u64).leading_zeros();
        // x = m * 2^exp with m = raw / 2^bitlen in [0.5, 1)
        let exp = bitlen as i32 - x.fmt.frac_bits as i32;
        let m = if w >= bitlen {
            (x.raw as i128) << (w - bitlen)
        } else {
            (x.raw as i128) >> (bitlen - w)
        };
        let mul = |a: i128, b: i128| shr_round(a * b, w, Rounding::NearestEven);
        let c48 = ((48.0 / 17.0) * (w as f64).exp2()).round() as i128;
        let c32 = ((32.0 / 17.0) * (w as f64).exp2()).round() as i128;
        let two = 2i128 << w;
        let mut y = c48 - mul(c32, m);
        let from_frac = w as i32 + exp;
        emit(Fx::from_scaled(y, from_frac, out));
        for _ in 0..self.iterations {
            y = mul(y, two - mul(m, y));
            emit(Fx::from_scaled(y, from_frac, out));
        }
        Ok(())
    }
}

/// Reciprocal with the default seed, working precision and threshold.
pub fn nr_reciprocal(x: Fx, iters: u32, out: FxFormat) -> Result<Fx, FxError> {
    NrReciprocal {
        iterations: iters,
        ..NrReciprocal::default()
    }
    .reciprocal(x, out)
}
