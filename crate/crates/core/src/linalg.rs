//! Small dense complex linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Result, ToolkitError};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Condition numbers above this make a Gram matrix unusable.
pub const MAX_CONDITION: f64 = 1e12;

/// Eigenvalues of a Hermitian matrix, ascending. Only the lower triangle is read.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Ratio of extreme singular values (infinite for a singular matrix).
pub fn condition_number(m: &CMatrix) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Fails with `SingularGram` when the condition number exceeds [`MAX_CONDITION`].
pub fn check_conditioning(m: &CMatrix) -> Result<f64> {
    let cond = condition_number(m);
    if !(cond <= MAX_CONDITION) {
        return Err(ToolkitError::singular(format!(
            "condition number {cond:.3e} exceeds {MAX_CONDITION:.0e}"
        )));
    }
    Ok(cond)
}

/// Solve `m x = b` after checking the conditioning of `m`.
pub fn solve(m: &CMatrix, b: &CVector) -> Result<CVector> {
    check_conditioning(m)?;
    m.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| ToolkitError::singular("LU factorization failed"))
}

/// Least-squares solution of an overdetermined system through the SVD.
pub fn least_squares(m: &CMatrix, b: &CVector) -> Result<CVector> {
    m.clone()
        .svd(true, true)
        .solve(b, 1e-13)
        .map_err(|e| ToolkitError::singular(format!("least squares failed: {e}")))
}

pub fn to_vector(values: &[Complex64]) -> CVector {
    CVector::from_column_slice(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hermitian_2x2_eigenvalues() {
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let ev = hermitian_eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn solve_and_conditioning() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(4.0 / 3.0, 0.0)]);
        let x = solve(&m, &to_vector(&[c(1.0, 0.0), c(0.0, 0.0)])).unwrap();
        assert!((x[0] - c(4.0, 0.0)).norm() < 1e-12);
        assert!((x[1] - c(-3.0, 0.0)).norm() < 1e-12);
        let sing = CMatrix::from_element(2, 2, c(1.0, 0.0));
        assert!(solve(&sing, &to_vector(&[c(1.0, 0.0), c(0.0, 0.0)])).is_err());
    }

    #[test]
    fn spectral_norm_of_shift() {
        let mut m = CMatrix::zeros(4, 4);
        for i in 0..3 {
            m[(i + 1, i)] = c(1.0, 0.0);
        }
        assert!((spectral_norm(&m) - 1.0).abs() < 1e-14);
    }
}
