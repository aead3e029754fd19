use num_complex::Complex64;

use super::block::{Block2, BlockHermitianMatrix, Conj, ToComplex64};
use super::engine::BlockEngine;
use crate::dense::CMatrix;
use crate::{Error, Result};

/// Block-LDL factors of `A = L·D·L^H`: unit block-lower-triangular `L`
/// (diagonal blocks are implied identities), block-diagonal `D`, and the
/// inverted diagonal blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BldlFactors<T> {
    n: usize,
    /// Strictly lower blocks in row order: (1,0), (2,0), (2,1), (3,0), …
    l: Vec<Block2<T>>,
    d: Vec<Block2<T>>,
    dinv: Vec<Block2<T>>,
    /// Exponent of `D` (that of `D⁻¹` is its negation); `L` is scale free.
    scale_exp: i32,
}

pub(crate) fn lower_index(i: usize, j: usize) -> usize {
    assert!(j < i, "block ({i}, {j}) is not strictly lower");
    i * (i - 1) / 2 + j
}

impl<T: Copy> BldlFactors<T> {
    pub fn from_parts(
        n: usize,
        l: Vec<Block2<T>>,
        d: Vec<Block2<T>>,
        dinv: Vec<Block2<T>>,
        scale_exp: i32,
    ) -> Self {
        assert_eq!(l.len(), n * n.saturating_sub(1) / 2);
        assert_eq!(d.len(), n);
        assert_eq!(dinv.len(), n);
        Self {
            n,
            l,
            d,
            dinv,
            scale_exp,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scale_exp(&self) -> i32 {
        self.scale_exp
    }

    pub fn l(&self, i: usize, j: usize) -> &Block2<T> {
        &self.l[lower_index(i, j)]
    }

    pub fn d(&self, j: usize) -> &Block2<T> {
        &self.d[j]
    }

    pub fn dinv(&self, j: usize) -> &Block2<T> {
        &self.dinv[j]
    }

    pub fn l_blocks(&self) -> &[Block2<T>] {
        &self.l
    }

    pub fn dinv_blocks(&self) -> &[Block2<T>] {
        &self.dinv
    }
}

impl<T: Copy + ToComplex64> BldlFactors<T> {
    /// Dense unit lower-triangular `L`.
    pub fn l_dense(&self) -> CMatrix {
        let u = 2 * self.n;
        CMatrix::from_fn(u, u, |r, c| {
            let (bi, bj) = (r / 2, c / 2);
            if bi > bj {
                self.l(bi, bj).m[r % 2][c % 2].to_c64()
            } else if r == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    fn block_diag(&self, blocks: &[Block2<T>], exp: i32) -> CMatrix {
        let u = 2 * self.n;
        let s = (exp as f64).exp2();
        CMatrix::from_fn(u, u, |r, c| {
            if r / 2 == c / 2 {
                blocks[r / 2].m[r % 2][c % 2].to_c64() * s
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn d_dense(&self) -> CMatrix {
        self.block_diag(&self.d, self.scale_exp)
    }

    pub fn dinv_dense(&self) -> CMatrix {
        self.block_diag(&self.dinv, -self.scale_exp)
    }

    /// `L·D·L^H`.
    pub fn reconstruct(&self) -> CMatrix {
        let l = self.l_dense();
        &(&l * &self.d_dense()) * &l.adjoint()
    }
}

/// Block-LDL factorization with 2×2 blocks:
///
/// ```text
/// for j = 1..N
///     D_jj = A_jj − Σ_{k<j} L_jk D_kk L_jk^H
///     for i = j+1..N
///         L_ij = (A_ij − Σ_{k<j} L_ik D_kk L_jk^H) · D_jj⁻¹
/// ```
///
/// Sums run over ascending `k`. Blocks below the diagonal of `A` are read
/// as `A_ji^H`, and `D_jj` is rebuilt from its upper triangle. A non-invertible `D_jj` aborts with `SingularBlock { block: j }`.
pub fn bldl_factorize<E: BlockEngine>(
    engine: &E,
    a: &BlockHermitianMatrix<E::Scalar>,
) -> Result<BldlFactors<E::Scalar>>
where
    E::Scalar: Conj,
{
    let n = a.n();
    let mut l: Vec<Option<Block2<E::Scalar>>> = vec![None; n * n.saturating_sub(1) / 2];
    let mut d = Vec::with_capacity(n);
    let mut dinv = Vec::with_capacity(n);
    let get = |l: &[Option<Block2<E::Scalar>>], i: usize, k: usize| {
        l[lower_index(i, k)].expect("L block computed in an earlier column")
    };

    for j in 0..n {
        let d_jj = if j == 0 {
            *a.upper(0, 0)
        } else {
            let mut s = None;
            for k in 0..j {
                let l_jk = get(&l, j, k);
                s = Some(engine.mmac(s.as_ref(), &l_jk, &d[k], &l_jk));
            }
            engine.msub(a.upper(j, j), &s.expect("j > 0")).hermitian_upper()
        };
        let inv = engine.minv(&d_jj).map_err(|delta| Error::SingularBlock {
            block: j + 1,
            delta,
            cycle: None,
        })?;
        d.push(d_jj);
        dinv.push(inv);

        for i in j + 1..n {
            let w = if j == 0 {
                a.block(i, 0)
            } else {
                let mut s = None;
                for k in 0..j {
                    let (l_ik, l_jk) = (get(&l, i, k), get(&l, j, k));
                    s = Some(engine.mmac(s.as_ref(), &l_ik, &d[k], &l_jk));
                }
                engine.msub(&a.block(i, j), &s.expect("j > 0"))
            };
            l[lower_index(i, j)] = Some(engine.mmult(&w, &dinv[j]));
        }
    }

    Ok(BldlFactors {
        n,
        l: l.into_iter().map(|b| b.expect("all L blocks computed")).collect(),
        d,
        dinv,
        scale_exp: a.scale_exp(),
    })
}
