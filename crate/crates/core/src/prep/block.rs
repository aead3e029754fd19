use num_complex::Complex64;

use crate::dense::CMatrix;
use crate::fxp::ComplexFixed;

pub trait Conj: Copy {
    fn conj(self) -> Self;
    /// Drops the imaginary part.
    fn real(self) -> Self;
}

impl Conj for Complex64 {
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }

    fn real(self) -> Self {
        Complex64::new(self.re, 0.0)
    }
}

impl Conj for ComplexFixed {
    fn conj(self) -> Self {
        ComplexFixed::conj(self)
    }

    fn real(self) -> Self {
        Self { im: crate::fxp::Fx::zero(self.format()), ..self }
    }
}

pub trait ToComplex64 {
    fn to_c64(&self) -> Complex64;
}

impl ToComplex64 for Complex64 {
    fn to_c64(&self) -> Complex64 {
        *self
    }
}

impl ToComplex64 for ComplexFixed {
    fn to_c64(&self) -> Complex64 {
        self.to_complex64()
    }
}

/// A 2×2 block, row-major: `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Block2<T> {
    pub m: [[T; 2]; 2],
}

impl<T: Copy> Block2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Self { m: [[a, b], [c, d]] }
    }

    pub fn map<U>(&self, f: impl Fn(T) -> U) -> Block2<U> {
        Block2 {
            m: [[f(self.m[0][0]), f(self.m[0][1])], [f(self.m[1][0]), f(self.m[1][1])]],
        }
    }
}

impl<T: Conj> Block2<T> {
    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    /// The Hermitian block defined by the upper triangle: real diagonal and
    /// `c = conj(b)`. This is what a diagonal register slot holds.
    pub fn hermitian_upper(&self) -> Self {
        let m = &self.m;
        Self::new(m[0][0].real(), m[0][1], m[0][1].conj(), m[1][1].real())
    }
}

impl Block2<Complex64> {
    pub fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Self::new(o, z, z, o)
    }

    pub fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self::new(z, z, z, z)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = Self::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.m[r][c] = self.m[r][0] * rhs.m[0][c] + self.m[r][1] * rhs.m[1][c];
            }
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut out = *self;
        for r in 0..2 {
            for c in 0..2 {
                out.m[r][c] -= rhs.m[r][c];
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = *self;
        for r in 0..2 {
            for c in 0..2 {
                out.m[r][c] += rhs.m[r][c];
            }
        }
        out
    }
}

impl<T: ToComplex64 + Copy> Block2<T> {
    pub fn to_c64(&self) -> Block2<Complex64> {
        self.map(|z| z.to_c64())
    }
}

/// Hermitian `2N × 2N` matrix held as its upper-triangular 2×2 blocks
/// `A_ij`, `i ≤ j`, which is the content of the register array. Lower blocks
/// are `A_ji^H`. Stored values times `2^scale_exp` give the represented matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockHermitianMatrix<T> {
    n: usize,
    blocks: Vec<Block2<T>>,
    scale_exp: i32,
}

impl<T: Copy + Conj> BlockHermitianMatrix<T> {
    /// `blocks` in row-major upper-triangle order: (0,0), (0,1), …, (0,N−1), (1,1), …
    pub fn from_upper(n: usize, blocks: Vec<Block2<T>>, scale_exp: i32) -> Self {
        assert_eq!(blocks.len(), n * (n + 1) / 2, "wrong number of upper blocks");
        Self {
            n,
            blocks,
            scale_exp,
        }
    }

    /// Number of 2×2 block rows, `N = U/2`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn scale_exp(&self) -> i32 {
        self.scale_exp
    }

    pub fn upper_blocks(&self) -> &[Block2<T>] {
        &self.blocks
    }

    pub fn upper(&self, i: usize, j: usize) -> &Block2<T> {
        &self.blocks[tri_index(self.n, i, j)]
    }

    /// Any block; those below the diagonal are materialized as `A_ji^H`.
    pub fn block(&self, i: usize, j: usize) -> Block2<T> {
        if i <= j {
            *self.upper(i, j)
        } else {
            self.upper(j, i).adjoint()
        }
    }

    /// Scalar entry of the full matrix, in stored units.
    pub fn entry(&self, r: usize, c: usize) -> T {
        self.block(r / 2, c / 2).m[r % 2][c % 2]
    }
}

impl<T: Copy + Conj + ToComplex64> BlockHermitianMatrix<T> {
    pub fn to_dense(&self) -> CMatrix {
        let s = (self.scale_exp as f64).exp2();
        CMatrix::from_fn(self.dim(), self.dim(), |r, c| self.entry(r, c).to_c64() * s)
    }
}

impl BlockHermitianMatrix<Complex64> {
    /// Upper blocks of a dense Hermitian matrix (the lower triangle is ignored).
    pub fn from_dense(a: &CMatrix) -> Self {
        assert_eq!(a.rows(), a.cols());
        assert!(a.rows().is_multiple_of(2), "dimension must be even");
        let n = a.rows() / 2;
        let mut blocks = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                let (r, c) = (2 * i, 2 * j);
                let lower = if i == j {
                    a[(r, c + 1)].conj()
                } else {
                    a[(r + 1, c)]
                };
                blocks.push(Block2::new(a[(r, c)], a[(r, c + 1)], lower, a[(r + 1, c + 1)]));
            }
        }
        Self::from_upper(n, blocks, 0)
    }
}

/// Position of upper block `(i, j)`, `i ≤ j`, in row-major upper-triangle order.
pub(crate) fn tri_index(n: usize, i: usize, j: usize) -> usize {
    assert!(i <= j && j < n, "block ({i}, {j}) is not in the upper triangle");
    i * n - i * i.saturating_sub(1) / 2 + (j - i)
}
