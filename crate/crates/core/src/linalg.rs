//! Small dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// |v⟩⟨v|
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

pub fn basis_vector(dim: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[index] = ONE;
    v
}

/// Eigenvalues of a Hermitian matrix sorted nonincreasing.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

/// Largest eigenvalue and a corresponding unit eigenvector.
pub fn top_eigenpair(m: &CMatrix) -> (f64, CVector) {
    let eig = m.clone().symmetric_eigen();
    let (idx, val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let v = eig.eigenvectors.column(idx).into_owned();
    (val, v)
}

/// Squared singular values, sorted nonincreasing.
pub fn squared_singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    let svd = m
        .clone()
        .try_svd(false, false, 1e-15, 10_000)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let mut vals: Vec<f64> = svd.singular_values.iter().map(|s| s * s).collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    Ok(vals)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// ⟨v|M|v⟩, real part.
pub fn expectation(m: &CMatrix, v: &CVector) -> f64 {
    v.dotc(&(m * v)).re
}
