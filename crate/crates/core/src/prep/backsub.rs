use super::bldl::BldlFactors;
use super::block::{Conj, ToComplex64};
use super::engine::BlockEngine;
use crate::dense::CMatrix;

/// `U × U` Hermitian inverse; stored entries times `2^scale_exp` give `A⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseMatrix<T> {
    u: usize,
    data: Vec<T>,
    scale_exp: i32,
}

impl<T: Copy> InverseMatrix<T> {
    pub fn from_vec(u: usize, data: Vec<T>, scale_exp: i32) -> Self {
        assert_eq!(data.len(), u * u);
        Self { u, data, scale_exp }
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn scale_exp(&self) -> i32 {
        self.scale_exp
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.u + c]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

impl<T: Copy + ToComplex64> InverseMatrix<T> {
    pub fn to_dense(&self) -> CMatrix {
        let s = (self.scale_exp as f64).exp2();
        CMatrix::from_fn(self.u, self.u, |r, c| self.get(r, c).to_c64() * s)
    }
}

/// The right-hand side `D⁻¹L⁻¹` restricted to the upper triangle: the
/// diagonal-block entries of `D⁻¹`, zero elsewhere. The off-diagonal part of
/// `L⁻¹` never enters.
pub(crate) fn rhs_entry<T: Copy>(f: &BldlFactors<T>, r: usize, c: usize) -> Option<T> {
    (r / 2 == c / 2).then(|| f.dinv(c / 2).m[r % 2][c % 2])
}

/// Scalar `l_tr` of the unit lower-triangular factor for `t > r`, or `None`
/// where it is structurally zero (inside a diagonal identity block).
pub(crate) fn l_entry<T: Copy>(f: &BldlFactors<T>, t: usize, r: usize) -> Option<T> {
    (t / 2 != r / 2).then(|| f.l(t / 2, r / 2).m[t % 2][r % 2])
}

/// Solves `L^H X = D⁻¹ L⁻¹` for `X = A⁻¹`, column by column from the last,
/// each column bottom to top:
///
/// `x_rc = [D⁻¹L⁻¹]_rc − Σ_{t>r} conj(l_tr) · x_tc`
///
/// Only `r ≤ c` is solved; for `t > c`, `x_tc` is taken as `conj(x_ct)` from
/// a column already finished. Diagonal entries keep only their real part.
pub fn backward_substitute<E: BlockEngine>(
    engine: &E,
    f: &BldlFactors<E::Scalar>,
) -> InverseMatrix<E::Scalar>
where
    E::Scalar: Conj,
{
    let u = 2 * f.n();
    let mut x: Vec<Option<E::Scalar>> = vec![None; u * u];
    for c in (0..u).rev() {
        for r in (0..=c).rev() {
            let mut acc = engine.pe_init(rhs_entry(f, r, c));
            for t in r + 1..u {
                let Some(l) = l_entry(f, t, r) else { continue };
                let x_tc = if t <= c {
                    x[t * u + c]
                } else {
                    x[c * u + t].map(Conj::conj)
                }
                .expect("entry solved earlier");
                acc = engine.pe_mac(acc, l, x_tc);
            }
            let v = engine.pe_finish(acc);
            x[r * u + c] = Some(if r == c { v.real() } else { v });
        }
    }
    let mut data = Vec::with_capacity(u * u);
    for r in 0..u {
        for c in 0..u {
            data.push(if r <= c {
                x[r * u + c].expect("upper solved")
            } else {
                x[c * u + r].expect("upper solved").conj()
            });
        }
    }
    InverseMatrix::from_vec(u, data, engine.inverse_scale_exp(f.scale_exp()))
}
