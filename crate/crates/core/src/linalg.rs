//! Small dense linear-algebra helpers shared by the sampler and analysis modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)]];
    }
    let mut eig: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Operator (spectral) norm of a symmetric matrix.
pub fn sym_op_norm(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m).into_iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Inverse of a symmetric positive-definite matrix via its eigendecomposition.
pub fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if n == 1 {
        let v = m[(0, 0)];
        if v <= 0.0 || !v.is_finite() {
            return Err(Error::Singular(format!("1x1 matrix with entry {v}")));
        }
        return Ok(DMatrix::from_element(1, 1, 1.0 / v));
    }
    let se = SymmetricEigen::new(m.clone());
    let min = se.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 || !min.is_finite() {
        return Err(Error::Singular(format!("smallest eigenvalue {min:e}")));
    }
    let inv_diag = DVector::from_iterator(n, se.eigenvalues.iter().map(|v| 1.0 / v));
    let q = &se.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&inv_diag) * q.transpose())
}

/// Largest absolute deviation of `QᵀQ` from the identity.
pub fn orthonormality_defect(q: &DMatrix<f64>) -> f64 {
    let n = q.ncols();
    let qtq = q.transpose() * q;
    (&qtq - DMatrix::<f64>::identity(n, n)).amax()
}

/// Sum of a slice by recursive halving. The result depends only on the order of
/// the input, never on how work is scheduled.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
