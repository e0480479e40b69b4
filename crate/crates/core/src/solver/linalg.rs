use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Diagonal jitter added when the plain Cholesky factorization fails.
pub const JITTER_FLOOR: f64 = 1e-10;

/// Solves the symmetric positive (semi)definite system `A x = b` by Cholesky.
///
/// If `A` is not numerically positive definite, a jitter of
/// `JITTER_FLOOR * max(1, max |A_jj|)` is added to the diagonal once before
/// giving up with [`Error::Singular`]. Only the lower triangle is read.
pub fn solve_penalized_system(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if !a.is_square() || a.nrows() != b.len() {
        return Err(Error::Shape(format!(
            "system matrix is {}x{} but right-hand side has length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    if let Some(chol) = a.clone().cholesky() {
        return Ok(chol.solve(b));
    }
    let scale = a.diagonal().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut jittered = a.clone();
    for i in 0..jittered.nrows() {
        jittered[(i, i)] += JITTER_FLOOR * scale;
    }
    jittered.cholesky().map(|c| c.solve(b)).ok_or(Error::Singular)
}
