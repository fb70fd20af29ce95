//! Dense complex matrix arithmetic: Hermitian/antihermitian splitting,
//! commutators, SVD-based numerical rank and orthonormal ranges.

mod matrix;
mod qr;
mod svd;

pub use matrix::{c64, ComplexMatrix};
pub use qr::qr;
pub use svd::{svd, SvdResult, JACOBI_SWEEP_LIMIT, JACOBI_TOL};

use crate::error::{dim_err, Result};

/// Default rank tolerance, relative to the largest singular value (or to the
/// natural scale of the operator where noted).
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

fn require_square(op: &'static str, a: &ComplexMatrix) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(dim_err(
            op,
            format!("expected a square matrix, got {}x{}", a.rows(), a.cols()),
        ))
    }
}

/// `A_H = (A + A^H) / 2`.
pub fn hermitian_part(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_square("hermitian_part", a)?;
    Ok(ComplexMatrix::from_fn(a.rows(), a.cols(), |i, j| {
        (a[(i, j)] + a[(j, i)].conj()) * 0.5
    }))
}

/// `A_AH = (A − A^H) / 2`.
pub fn antihermitian_part(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_square("antihermitian_part", a)?;
    Ok(ComplexMatrix::from_fn(a.rows(), a.cols(), |i, j| {
        (a[(i, j)] - a[(j, i)].conj()) * 0.5
    }))
}

/// `Δ(A) = [A, A^H] = A^H A − A A^H`.
pub fn commutator(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_square("commutator", a)?;
    let aha = a.adjoint_mul(a);
    let aah = a * &a.adjoint();
    Ok(&aha - &aah)
}

/// Orthonormal basis `Q` (`n × s`) of `range(Z)` at relative tolerance `tol`.
/// A zero `Z` yields `s = 0` and an `n × 0` matrix.
pub fn orthonormal_range(z: &ComplexMatrix, tol: f64) -> Result<(ComplexMatrix, usize)> {
    let res = svd(z, tol)?;
    let s = res.numerical_rank;
    Ok((res.left_vectors.columns(0..s), s))
}

/// Like [`orthonormal_range`] but counts singular values above an absolute
/// threshold instead of one relative to `σ_max`.
pub fn orthonormal_range_abs(z: &ComplexMatrix, threshold: f64) -> Result<(ComplexMatrix, usize)> {
    let res = svd(z, DEFAULT_RANK_TOL)?;
    let s = res.rank_above(threshold);
    Ok((res.left_vectors.columns(0..s), s))
}

/// `X − Q (Q^H X)` for `Q` with orthonormal columns.
pub fn project_out(x: &ComplexMatrix, q: &ComplexMatrix) -> ComplexMatrix {
    if q.cols() == 0 {
        return x.clone();
    }
    let coeffs = q.adjoint_mul(x);
    x - &(q * &coeffs)
}

/// `‖(I − P_Y) X‖_F / max(1, ‖X‖_F)` with `P_Y` the orthogonal projector onto
/// `range(Y)`. Zero exactly when `range(X) ⊆ range(Y)` numerically.
pub fn subspace_inclusion_residual(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<f64> {
    if x.rows() != y.rows() {
        return Err(dim_err(
            "subspace_inclusion_residual",
            format!("X has {} rows, Y has {}", x.rows(), y.rows()),
        ));
    }
    let xn = x.frobenius_norm();
    if x.cols() == 0 {
        return Ok(0.0);
    }
    let q = if y.cols() == 0 {
        ComplexMatrix::zeros(y.rows(), 0)
    } else {
        orthonormal_range(y, DEFAULT_RANK_TOL)?.0
    };
    let mut r = project_out(x, &q);
    r = project_out(&r, &q);
    Ok(r.frobenius_norm() / xn.max(1.0))
}
