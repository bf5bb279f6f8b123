//! Small dense helpers over nalgebra for the float stages.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::scalar::Scalar;

pub fn to_dmatrix<S: Scalar>(rows: &[Vec<S>]) -> DMatrix<f64> {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    DMatrix::from_fn(r, c, |i, j| rows[i][j].as_f64())
}

/// `(M + Mᵀ)/2`.
pub fn symmetric_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues of the symmetric part, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = SymmetricEigen::new(symmetric_part(m)).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Smallest eigenvalue of the symmetric part; `+∞` for an empty matrix.
pub fn min_sym_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m).first().copied().unwrap_or(f64::INFINITY)
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// `max |⟨Mx, x⟩| / |x|²`.
pub fn numerical_radius_sym(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m).iter().map(|x| x.abs()).fold(0.0, f64::max)
}
