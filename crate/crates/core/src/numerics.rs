//! Small dense linear-algebra kernel: partial-pivoted linear solves, the
//! Kronecker-vectorized Lyapunov solver, and the Sherman-Morrison rank-one
//! inverse update. Oracle-grade code for desk-scale matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Pivot threshold relative to the row scale of A.
const PIVOT_TOL: f64 = 1e-12;

/// Denominator threshold for the rank-one update.
const SMW_TOL: f64 = 1e-12;

/// Solves A X = B by Gaussian elimination with partial pivoting. A pivot
/// smaller than 1e-12 times the original row scale signals singularity.
pub fn solve_linear(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n, "A must be square");
    assert_eq!(b.nrows(), n, "B must have as many rows as A");
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale: Vec<f64> = (0..n)
        .map(|i| lu.row(i).iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
        .collect();
    let mut perm_scale: Vec<f64> = scale.clone();
    for col in 0..n {
        // pick the pivot with the largest scaled magnitude
        let mut best = col;
        let mut best_ratio = -1.0;
        for row in col..n {
            let s = perm_scale[row].max(f64::MIN_POSITIVE);
            let ratio = lu[(row, col)].abs() / s;
            if ratio > best_ratio {
                best_ratio = ratio;
                best = row;
            }
        }
        if lu[(best, col)].abs() <= PIVOT_TOL * perm_scale[best] {
            return Err(Error::SingularMatrix);
        }
        if best != col {
            lu.swap_rows(col, best);
            x.swap_rows(col, best);
            perm_scale.swap(col, best);
        }
        let pivot = lu[(col, col)];
        for row in col + 1..n {
            let factor = lu[(row, col)] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                let v = lu[(col, k)];
                lu[(row, k)] -= factor * v;
            }
            for k in 0..x.ncols() {
                let v = x[(col, k)];
                x[(row, k)] -= factor * v;
            }
        }
    }
    // back substitution
    for col in (0..n).rev() {
        let pivot = lu[(col, col)];
        for k in 0..x.ncols() {
            let mut acc = x[(col, k)];
            for j in col + 1..n {
                acc -= lu[(col, j)] * x[(j, k)];
            }
            x[(col, k)] = acc / pivot;
        }
    }
    Ok(x)
}

/// Convenience inverse via [`solve_linear`].
pub fn invert(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    solve_linear(a, &DMatrix::identity(a.nrows(), a.nrows()))
}

/// Solves A X + X A^T + Q = 0 for symmetric Q by vectorizing to the
/// (I (x) A + A (x) I) system. O(k^6) at dimension k; oracle use only.
pub fn lyapunov_solve(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = a.nrows();
    assert_eq!(a.ncols(), k, "A must be square");
    assert_eq!((q.nrows(), q.ncols()), (k, k), "Q must match A");
    if k == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let eye = DMatrix::identity(k, k);
    let big = eye.kronecker(a) + a.kronecker(&eye);
    let rhs = DMatrix::from_column_slice(k * k, 1, q.as_slice()).scale(-1.0);
    let sol = solve_linear(&big, &rhs)?;
    let x = DMatrix::from_column_slice(k, k, sol.as_slice());
    // symmetrize: the exact solution is symmetric for symmetric Q
    Ok((&x + x.transpose()).scale(0.5))
}

/// Sherman-Morrison update: given M^{-1}, returns (M + c u u^T)^{-1}.
pub fn smw_update_inverse(
    m_inv: &DMatrix<f64>,
    u: &DVector<f64>,
    c: f64,
) -> Result<DMatrix<f64>> {
    let mu = m_inv * u;
    let denom = 1.0 + c * u.dot(&mu);
    if denom.abs() < SMW_TOL {
        return Err(Error::DegenerateUpdate);
    }
    Ok(m_inv - (&mu * mu.transpose()).scale(c / denom))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(rng: &mut impl Rng, k: usize) -> DMatrix<f64> {
        let a = DMatrix::from_fn(k, k, |_, _| rng.gen_range(-1.0..1.0));
        &a * a.transpose() + DMatrix::identity(k, k).scale(0.5)
    }

    #[test]
    fn identity_solve() {
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let x = solve_linear(&DMatrix::identity(2, 2), &b).unwrap();
        assert_relative_eq!(x, b, epsilon = 1e-14);
    }

    #[test]
    fn tri_weight_gram_inverse() {
        // (R W R^T)^{-1} for the triangle fixture with tree {e12, e13}
        let a = DMatrix::from_row_slice(2, 2, &[4.0, -1.0, -1.0, 3.0]);
        let x = invert(&a).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 4.0]).scale(1.0 / 11.0);
        assert_relative_eq!(x, expected, epsilon = 1e-12);
    }

    #[test]
    fn singular_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(
            solve_linear(&a, &DMatrix::identity(2, 2)).unwrap_err(),
            Error::SingularMatrix
        );
    }

    #[test]
    fn solve_residual_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let k = rng.gen_range(1..=12);
            let a = DMatrix::from_fn(k, k, |_, _| rng.gen_range(-5.0..5.0));
            let b = DMatrix::from_fn(k, 3, |_, _| rng.gen_range(-5.0..5.0));
            match solve_linear(&a, &b) {
                Ok(x) => {
                    let resid = (&a * &x - &b).norm();
                    assert!(resid <= 1e-8 * (a.norm() * x.norm() + b.norm()));
                }
                Err(Error::SingularMatrix) => {}
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }

    #[test]
    fn scalar_lyapunov() {
        let x = lyapunov_solve(
            &DMatrix::from_element(1, 1, -1.0),
            &DMatrix::from_element(1, 1, 2.0),
        )
        .unwrap();
        assert_relative_eq!(x[(0, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn commuting_lyapunov() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q0 = random_spd(&mut rng, 4);
        let a = DMatrix::identity(4, 4).scale(-1.0);
        let x = lyapunov_solve(&a, &q0).unwrap();
        assert_relative_eq!(x, q0.scale(0.5), epsilon = 1e-10);
    }

    #[test]
    fn lyapunov_residual_and_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let k = rng.gen_range(1..=8);
            let spd = random_spd(&mut rng, k);
            let a = spd.scale(-1.0); // -SPD is Hurwitz
            let q = random_spd(&mut rng, k);
            let x = lyapunov_solve(&a, &q).unwrap();
            let resid = (&a * &x + &x * a.transpose() + &q).norm();
            assert!(resid <= 1e-8 * q.norm(), "residual {resid}");
            assert_relative_eq!(x.clone(), x.transpose(), epsilon = 1e-10);
            let min_eig = x
                .clone()
                .symmetric_eigenvalues()
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            assert!(min_eig >= -1e-8 * x.norm());
        }
    }

    #[test]
    fn non_hurwitz_lyapunov_fails() {
        // zero row/column makes I(x)A + A(x)I singular
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 0.0]);
        let q = DMatrix::identity(2, 2);
        assert_eq!(lyapunov_solve(&a, &q).unwrap_err(), Error::SingularMatrix);
    }

    #[test]
    fn smw_unit_example() {
        let m_inv = DMatrix::identity(3, 3);
        let u = DVector::from_column_slice(&[1.0, 0.0, 0.0]);
        let upd = smw_update_inverse(&m_inv, &u, 1.0).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_column_slice(&[0.5, 1.0, 1.0]));
        assert_relative_eq!(upd, expected, epsilon = 1e-14);
    }

    #[test]
    fn smw_tri_example() {
        // W_T = diag(3,2) updated by the triangle chord column
        let m_inv =
            DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0 / 3.0, 1.0 / 2.0]));
        let u = DVector::from_column_slice(&[-1.0, 1.0]);
        let upd = smw_update_inverse(&m_inv, &u, 1.0).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 4.0]).scale(1.0 / 11.0);
        assert_relative_eq!(upd, expected, epsilon = 1e-12);
    }

    #[test]
    fn smw_matches_direct_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let k = rng.gen_range(1..=20);
            let m = random_spd(&mut rng, k);
            let u = DVector::from_fn(k, |_, _| rng.gen_range(-1.0..1.0));
            let c = rng.gen_range(0.1..2.0);
            let m_inv = invert(&m).unwrap();
            let upd = smw_update_inverse(&m_inv, &u, c).unwrap();
            let direct = invert(&(&m + (&u * u.transpose()).scale(c))).unwrap();
            let rel = (&upd - &direct).norm() / direct.norm();
            assert!(rel <= 1e-10, "relative error {rel}");
            let check = &upd * (&m + (&u * u.transpose()).scale(c));
            assert_relative_eq!(check, DMatrix::identity(k, k), epsilon = 1e-9);
        }
    }

    #[test]
    fn smw_degenerate() {
        // M = I, c = -1, u = e1 makes the update singular
        let m_inv = DMatrix::identity(2, 2);
        let u = DVector::from_column_slice(&[1.0, 0.0]);
        assert_eq!(
            smw_update_inverse(&m_inv, &u, -1.0).unwrap_err(),
            Error::DegenerateUpdate
        );
    }

    #[test]
    fn trace_cyclicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let r = rng.gen_range(1..=6);
            let c = rng.gen_range(1..=6);
            let a = DMatrix::from_fn(r, c, |_, _| rng.gen_range(-2.0..2.0));
            let b = DMatrix::from_fn(c, r, |_, _| rng.gen_range(-2.0..2.0));
            assert_relative_eq!((&a * &b).trace(), (&b * &a).trace(), epsilon = 1e-10);
        }
    }
}
