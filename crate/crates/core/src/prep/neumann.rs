use num_complex::Complex64;

use super::backsub::InverseMatrix;
use super::block::BlockHermitianMatrix;
use crate::dense::CMatrix;
use crate::{Error, Result};

/// Truncated Neumann series around the scalar diagonal `A = Dg + E`:
/// `A⁻¹ ≈ Σ_{k<K} (−Dg⁻¹E)^k Dg⁻¹`.
pub fn neumann_inverse(
    a: &BlockHermitianMatrix<Complex64>,
    terms: usize,
) -> Result<InverseMatrix<Complex64>> {
    if terms == 0 {
        return Err(Error::Config("Neumann series needs at least one term".into()));
    }
    let dense = a.to_dense();
    let u = dense.rows();
    let mut dg_inv = Vec::with_capacity(u);
    for k in 0..u {
        let d = dense[(k, k)];
        if d.norm() == 0.0 {
            return Err(Error::ZeroDiagonal(k));
        }
        dg_inv.push(d.inv());
    }
    // −Dg⁻¹E
    let step = CMatrix::from_fn(u, u, |r, c| {
        if r == c {
            Complex64::new(0.0, 0.0)
        } else {
            -dg_inv[r] * dense[(r, c)]
        }
    });
    let mut term = CMatrix::from_fn(u, u, |r, c| {
        if r == c {
            dg_inv[r]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let mut sum = term.clone();
    for _ in 1..terms {
        term = &step * &term;
        sum = &sum + &term;
    }
    Ok(InverseMatrix::from_vec(u, sum.as_slice().to_vec(), 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prep::{reference_inverse, Block2};
    use rand_distr::{Distribution, Normal};
    use rand::SeedableRng;

    #[test]
    fn diagonal_is_exact_for_any_k() {
        let d = CMatrix::from_fn(4, 4, |r, c| {
            if r == c {
                Complex64::new((r + 1) as f64, 0.0)
            } else {
                Complex64::default()
            }
        });
        let a = BlockHermitianMatrix::from_dense(&d);
        for k in 1..4 {
            let x = neumann_inverse(&a, k).unwrap().to_dense();
            assert!(x.rel_error(&reference_inverse(&d).unwrap()) < 1e-15);
        }
    }

    #[test]
    fn one_term_is_inverse_diagonal() {
        let c = |re, im| Complex64::new(re, im);
        let b = Block2::new(c(2.0, 0.0), c(1.0, 1.0), c(1.0, -1.0), c(4.0, 0.0));
        let a = BlockHermitianMatrix::from_upper(1, vec![b], 0);
        let x = neumann_inverse(&a, 1).unwrap();
        assert_eq!(x.get(0, 0), c(0.5, 0.0));
        assert_eq!(x.get(1, 1), c(0.25, 0.0));
        assert_eq!(x.get(0, 1), c(0.0, 0.0));
    }

    #[test]
    fn more_terms_reduce_error_on_iid_channel() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let g = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).unwrap();
        let h = CMatrix::from_fn(64, 16, |_, _| Complex64::new(g.sample(&mut rng), g.sample(&mut rng)));
        let dense = &(&h.adjoint() * &h) + &CMatrix::identity(16).scale(1.0);
        let exact = reference_inverse(&dense).unwrap();
        let a = BlockHermitianMatrix::from_dense(&dense);
        let e1 = neumann_inverse(&a, 1).unwrap().to_dense().rel_error(&exact);
        let e3 = neumann_inverse(&a, 3).unwrap().to_dense().rel_error(&exact);
        assert!(e3 < e1, "K=1 error {e1}, K=3 error {e3}");
    }

    #[test]
    fn zero_diagonal_rejected() {
        let a = BlockHermitianMatrix::from_dense(&CMatrix::zeros(2, 2));
        assert!(matches!(neumann_inverse(&a, 2), Err(Error::ZeroDiagonal(0))));
        assert!(neumann_inverse(&a, 0).is_err());
    }
}
