use num_complex::Complex64;

use crate::dense::CMatrix;
use crate::{Error, Result};

/// Gauss-Jordan inverse with partial pivoting, independent of the block
/// factorization path.
pub fn reference_inverse(a: &CMatrix) -> Result<CMatrix> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Dimension(format!("{}×{} is not square", n, a.cols())));
    }
    let scale = a.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::SingularMatrix);
    }
    let mut m = a.clone();
    let mut inv = CMatrix::identity(n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| m[(p, col)].norm().total_cmp(&m[(q, col)].norm()))
            .expect("non-empty range");
        if m[(pivot, col)].norm() <= 1e-14 * scale {
            return Err(Error::SingularMatrix);
        }
        if pivot != col {
            for c in 0..n {
                let t = m[(col, c)];
                m[(col, c)] = m[(pivot, c)];
                m[(pivot, c)] = t;
                let t = inv[(col, c)];
                inv[(col, c)] = inv[(pivot, c)];
                inv[(pivot, c)] = t;
            }
        }
        let p = m[(col, col)].inv();
        for c in 0..n {
            m[(col, c)] *= p;
            inv[(col, c)] *= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[(r, col)];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in 0..n {
                let (mc, ic) = (m[(col, c)], inv[(col, c)]);
                m[(r, c)] -= f * mc;
                inv[(r, c)] -= f * ic;
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn identity_and_diagonal() {
        assert_eq!(reference_inverse(&CMatrix::identity(4)).unwrap(), CMatrix::identity(4));
        let d = [2.0, 4.0, 5.0, 10.0];
        let a = CMatrix::from_fn(4, 4, |r, c| if r == c { Complex64::new(d[r], 0.0) } else { Complex64::default() });
        let inv = reference_inverse(&a).unwrap();
        for (k, v) in [0.5, 0.25, 0.2, 0.1].iter().enumerate() {
            assert!((inv[(k, k)].re - v).abs() < 1e-16);
        }
    }

    #[test]
    fn random_pd_multiply_back() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let m = CMatrix::from_fn(24, 16, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let a = &(&m.adjoint() * &m) + &CMatrix::identity(16);
        let x = reference_inverse(&a).unwrap();
        assert!((&(&a * &x) - &CMatrix::identity(16)).frobenius() < 1e-12);
    }

    #[test]
    fn singular_rejected() {
        let a = CMatrix::from_fn(3, 3, |_, _| Complex64::new(1.0, 0.0));
        assert!(matches!(reference_inverse(&a), Err(Error::SingularMatrix)));
        assert!(reference_inverse(&CMatrix::zeros(2, 3)).is_err());
    }
}
