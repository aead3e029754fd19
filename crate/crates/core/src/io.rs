//! Plain-text matrix files and `key=value` configuration files.
//!
//! A matrix file starts with the header `rows cols kind precision` followed
//! by one line per matrix row of `re im` pairs. `precision` is either
//! `float` (decimal values that round-trip exactly) or `fixed:W:F:E`: raw
//! two's-complement codes of a `W`-bit word with `F` fractional bits, scaled
//! by `2^E`, so fixed-point files are bit-exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::dense::CMatrix;
use crate::fxp::{ComplexFixed, FxFormat};
use crate::prep::{BldlFactors, InverseMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixData {
    Float(CMatrix),
    Fixed {
        fmt: FxFormat,
        scale_exp: i32,
        entries: Vec<ComplexFixed>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub kind: String,
    pub data: MatrixData,
}

impl MatrixFile {
    pub fn float(kind: &str, m: CMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            kind: kind.to_string(),
            data: MatrixData::Float(m),
        }
    }

    pub fn fixed(kind: &str, rows: usize, cols: usize, scale_exp: i32, entries: Vec<ComplexFixed>) -> Result<Self> {
        let fmt = entries
            .first()
            .map(|e| e.format())
            .ok_or_else(|| Error::Dimension("empty fixed-point matrix".into()))?;
        if entries.len() != rows * cols || entries.iter().any(|e| e.format() != fmt) {
            return Err(Error::Dimension(format!(
                "{} entries of mixed or wrong shape for {rows}×{cols}",
                entries.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            kind: kind.to_string(),
            data: MatrixData::Fixed {
                fmt,
                scale_exp,
                entries,
            },
        })
    }

    pub fn from_inverse(inv: &InverseMatrix<ComplexFixed>) -> Result<Self> {
        Self::fixed("inverse", inv.u(), inv.u(), inv.scale_exp(), inv.as_slice().to_vec())
    }

    /// Dense unit lower-triangular `L`.
    pub fn from_l(f: &BldlFactors<ComplexFixed>) -> Result<Self> {
        let u = 2 * f.n();
        let fmt = f
            .l_blocks()
            .first()
            .map(|b| b.m[0][0].format())
            .unwrap_or(f.dinv(0).m[0][0].format());
        let one = ComplexFixed::from_scaled(1, 0, 0, fmt);
        let zero = ComplexFixed::zero(fmt);
        let mut e = Vec::with_capacity(u * u);
        for r in 0..u {
            for c in 0..u {
                e.push(if r == c {
                    one
                } else if r / 2 > c / 2 {
                    f.l(r / 2, c / 2).m[r % 2][c % 2]
                } else {
                    zero
                });
            }
        }
        Self::fixed("l", u, u, 0, e)
    }

    /// Block-diagonal `D⁻¹`.
    pub fn from_dinv(f: &BldlFactors<ComplexFixed>, scale_exp: i32) -> Result<Self> {
        let u = 2 * f.n();
        let zero = ComplexFixed::zero(f.dinv(0).m[0][0].format());
        let mut e = Vec::with_capacity(u * u);
        for r in 0..u {
            for c in 0..u {
                e.push(if r / 2 == c / 2 { f.dinv(r / 2).m[r % 2][c % 2] } else { zero });
            }
        }
        Self::fixed("dinv", u, u, scale_exp, e)
    }

    pub fn to_cmatrix(&self) -> CMatrix {
        match &self.data {
            MatrixData::Float(m) => m.clone(),
            MatrixData::Fixed {
                scale_exp, entries, ..
            } => {
                let s = (*scale_exp as f64).exp2();
                CMatrix::from_vec(self.rows, self.cols, entries.iter().map(|e| e.to_complex64() * s).collect())
            }
        }
    }

    pub fn precision(&self) -> String {
        match &self.data {
            MatrixData::Float(_) => "float".into(),
            MatrixData::Fixed { fmt, scale_exp, .. } => {
                format!("fixed:{}:{}:{}", fmt.total_bits(), fmt.frac_bits(), scale_exp)
            }
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {} {}\n", self.rows, self.cols, self.kind, self.precision());
        for r in 0..self.rows {
            let line: Vec<String> = (0..self.cols)
                .map(|c| match &self.data {
                    MatrixData::Float(m) => format!("{:?} {:?}", m[(r, c)].re, m[(r, c)].im),
                    MatrixData::Fixed { entries, .. } => {
                        let (re, im) = entries[r * self.cols + c].raw();
                        format!("{re} {im}")
                    }
                })
                .collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 {
            return Err(perr(hl, format!("header needs `rows cols kind precision`, got `{header}`")));
        }
        let rows: usize = h[0].parse().map_err(|_| perr(hl, format!("bad row count `{}`", h[0])))?;
        let cols: usize = h[1].parse().map_err(|_| perr(hl, format!("bad column count `{}`", h[1])))?;
        if rows == 0 || cols == 0 {
            return Err(perr(hl, "empty matrix".into()));
        }
        let kind = h[2].to_string();
        let fixed = match h[3] {
            "float" => None,
            p => {
                let parts: Vec<&str> = p.split(':').collect();
                let bad = || perr(hl, format!("bad precision `{p}`"));
                if parts.len() != 4 || parts[0] != "fixed" {
                    return Err(bad());
                }
                let w: u32 = parts[1].parse().map_err(|_| bad())?;
                let f: u32 = parts[2].parse().map_err(|_| bad())?;
                let e: i32 = parts[3].parse().map_err(|_| bad())?;
                Some((FxFormat::new(w, f).map_err(|err| perr(hl, err.to_string()))?, e))
            }
        };

        let mut values = Vec::with_capacity(rows * cols);
        let mut seen = 0;
        for (ln, line) in lines {
            seen += 1;
            if seen > rows {
                return Err(perr(ln, format!("more than {rows} rows")));
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() != 2 * cols {
                return Err(perr(ln, format!("expected {} numbers, found {}", 2 * cols, tok.len())));
            }
            for pair in tok.chunks(2) {
                values.push((pair[0], pair[1], ln));
            }
        }
        if seen != rows {
            return Err(perr(hl, format!("header announces {rows} rows, file has {seen}")));
        }
        let data = match fixed {
            None => {
                let v = values
                    .iter()
                    .map(|&(re, im, ln)| {
                        let p = |s: &str| {
                            s.parse::<f64>()
                                .ok()
                                .filter(|v| v.is_finite())
                                .ok_or_else(|| perr(ln, format!("bad number `{s}`")))
                        };
                        Ok(Complex64::new(p(re)?, p(im)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                MatrixData::Float(CMatrix::from_vec(rows, cols, v))
            }
            Some((fmt, scale_exp)) => {
                let entries = values
                    .iter()
                    .map(|&(re, im, ln)| {
                        let p = |s: &str| s.parse::<i64>().map_err(|_| perr(ln, format!("bad code `{s}`")));
                        ComplexFixed::from_raw(p(re)?, p(im)?, fmt).map_err(|e| perr(ln, e.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                MatrixData::Fixed {
                    fmt,
                    scale_exp,
                    entries,
                }
            }
        };
        Ok(Self {
            rows,
            cols,
            kind,
            data,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            msg: format!("expected key=value, got `{line}`"),
        })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Parse {
                line: i + 1,
                msg: "empty key".into(),
            });
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}
