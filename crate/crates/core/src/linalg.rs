//! Small dense linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative tolerance for accepting a matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

pub fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let gap = (m[(i, j)] - m[(j, i)]).abs();
            if gap > SYMMETRY_TOL * scale {
                return Err(Error::Integrity(format!(
                    "hessian is not symmetric: |H[{i},{j}] - H[{j},{i}]| = {gap:e}"
                )));
            }
        }
    }
    Ok(())
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    let sym = (m + m.transpose()) * 0.5;
    let mut eig: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().cloned().collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    Ok(eig)
}

/// Operator norm (largest absolute eigenvalue) of a symmetric matrix.
pub fn operator_norm(m: &DMatrix<f64>) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    if m.nrows() == 2 && m.ncols() == 2 {
        check_symmetric(m)?;
        let (a, b, d) = (m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        return Ok(mid.abs() + rad);
    }
    Ok(symmetric_eigenvalues(m)?.iter().fold(0.0, |acc, v| acc.max(v.abs())))
}

/// Counts of (positive, zero, negative) eigenvalues with a relative zero threshold.
pub fn signature(m: &DMatrix<f64>, rel_tol: f64) -> Result<(usize, usize, usize)> {
    let eig = symmetric_eigenvalues(m)?;
    let cut = rel_tol * m.amax().max(1.0);
    let pos = eig.iter().filter(|v| **v > cut).count();
    let neg = eig.iter().filter(|v| **v < -cut).count();
    Ok((pos, eig.len() - pos - neg, neg))
}

/// Minimum-norm least-squares solution of `a x = b` via SVD.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = (smax * 1e-12).max(1e-300);
    svd.solve(b, eps).unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_norm() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -5.0]));
        assert_eq!(operator_norm(&m).unwrap(), 5.0);
        assert_eq!(signature(&m, 1e-12).unwrap(), (1, 0, 1));
    }

    #[test]
    fn asymmetric_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.1, 1.0]);
        assert!(matches!(operator_norm(&m), Err(Error::Integrity(_))));
    }

    #[test]
    fn lstsq_handles_rank_deficiency() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let x = lstsq(&a, &DVector::from_vec(vec![2.0, 0.0]));
        assert!((x[0] - 2.0).abs() < 1e-14 && x[1].abs() < 1e-14 && x[2].abs() < 1e-14);
    }
}
