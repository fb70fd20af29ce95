//! Almost-normal structure: commutator certificates, the perturbations `C`
//! for Hermitian- and unitary-plus-rank-one matrices, starting blocks that
//! make block Lanczos on `A_H` also reduce `A`, and the degree-2
//! polyanalytic machinery for normal-plus-rank-one matrices.

mod conic;

pub use conic::{
    conic_fit, hypothesis1_quantity, hypothesis1_rotation, leading_form_residual, leading_part_decomposition,
    ConicCoefficients, LeadingPart, LeadingVariant, RealConic,
};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{dim_err, Error, Result};
use crate::matcore::{
    antihermitian_part, commutator, hermitian_part, orthonormal_range, orthonormal_range_abs, svd, ComplexMatrix,
    DEFAULT_RANK_TOL,
};

/// Smallest singular value of the column-normalised `[u, v]` above which the
/// two vectors count as linearly independent.
pub const INDEPENDENCE_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct CommutatorCertificate {
    pub perturbation: ComplexMatrix,
    pub claimed_rank: usize,
    /// Numerical rank of `perturbation`.
    pub perturbation_rank: usize,
    /// `‖Δ(A) − (CA − AC)‖_F / max(1, ‖A‖_F²)`.
    pub residual: f64,
    /// Orthonormal basis of `S = range(Δ(A))`.
    pub range_basis: ComplexMatrix,
    pub range_dim: usize,
    /// Residual threshold the certificate was checked against.
    pub tol: f64,
}

impl CommutatorCertificate {
    pub fn is_valid(&self) -> bool {
        self.residual <= self.tol && self.perturbation_rank <= self.claimed_rank
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CertificateSummary {
    pub residual: f64,
    pub perturbation_rank: usize,
    pub range_dim: usize,
    pub claimed_rank: usize,
    pub valid: bool,
}

impl From<&CommutatorCertificate> for CertificateSummary {
    fn from(c: &CommutatorCertificate) -> Self {
        Self {
            residual: c.residual,
            perturbation_rank: c.perturbation_rank,
            range_dim: c.range_dim,
            claimed_rank: c.claimed_rank,
            valid: c.is_valid(),
        }
    }
}

/// Orthonormal basis of `range(Δ(A))`, ranked against `rank_tol · ‖A‖_F²`.
pub fn commutator_range(a: &ComplexMatrix, rank_tol: f64) -> Result<(ComplexMatrix, usize)> {
    let delta = commutator(a)?;
    let scale = a.frobenius_norm().powi(2);
    orthonormal_range_abs(&delta, rank_tol * scale)
}

/// Checks `[A, A^H] = CA − AC` and records the rank data of `C` and `S`.
pub fn certify(a: &ComplexMatrix, c: &ComplexMatrix, k: usize, tol: f64) -> Result<CommutatorCertificate> {
    if !a.is_square() || a.shape() != c.shape() {
        return Err(dim_err(
            "certify",
            format!("A is {}x{}, C is {}x{}", a.rows(), a.cols(), c.rows(), c.cols()),
        ));
    }
    let delta = commutator(a)?;
    let rhs = &(c * a) - &(a * c);
    let a2 = a.frobenius_norm().powi(2);
    let residual = (&delta - &rhs).frobenius_norm() / a2.max(1.0);
    let perturbation_rank = svd(c, DEFAULT_RANK_TOL)?.numerical_rank;
    let (range_basis, range_dim) = commutator_range(a, DEFAULT_RANK_TOL)?;
    Ok(CommutatorCertificate {
        perturbation: c.clone(),
        claimed_rank: k,
        perturbation_rank,
        residual,
        range_basis,
        range_dim,
        tol,
    })
}

fn require_vector(name: &str, v: &ComplexMatrix, n: usize) -> Result<()> {
    if v.shape() != (n, 1) {
        return Err(dim_err(
            "starting block",
            format!("{name} must be {n}x1, got {}x{}", v.rows(), v.cols()),
        ));
    }
    Ok(())
}

/// Smallest singular value of `[x/‖x‖, y/‖y‖]`.
pub fn independence_measure(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<f64> {
    let (xn, yn) = (x.frobenius_norm(), y.frobenius_norm());
    if xn == 0.0 || yn == 0.0 {
        return Ok(0.0);
    }
    let pair = ComplexMatrix::hcat(&[&x.scale_real(1.0 / xn), &y.scale_real(1.0 / yn)])?;
    Ok(svd(&pair, DEFAULT_RANK_TOL)?.singular_values[1])
}

/// Starting block for a 1-almost normal `A` with `C = u v^H`: `[u, v]` when
/// the vectors are independent, `[u]` when `C = α u u^H`.
pub fn starting_block_rank_one(
    a: &ComplexMatrix,
    u: &ComplexMatrix,
    v: &ComplexMatrix,
    tol: f64,
) -> Result<ComplexMatrix> {
    let n = a.rows();
    require_vector("u", u, n)?;
    require_vector("v", v, n)?;
    if u.frobenius_norm() == 0.0 {
        return Err(Error::Argument("u is zero, C would vanish".into()));
    }
    if v.frobenius_norm() == 0.0 {
        return Err(Error::Argument("v is zero, C would vanish".into()));
    }
    if independence_measure(u, v)? > tol {
        ComplexMatrix::hcat(&[u, v])
    } else {
        Ok(u.clone())
    }
}

/// Starting block for a 2-almost normal `A` with `C = U V^H`.
///
/// Returns `[U, V]` when it has rank 4, otherwise an orthonormal basis of
/// `S = range(Δ(A))` (at most 4 columns).
pub fn starting_block_rank_two(
    a: &ComplexMatrix,
    u: &ComplexMatrix,
    v: &ComplexMatrix,
    tol: f64,
) -> Result<ComplexMatrix> {
    let n = a.rows();
    if u.shape() != (n, 2) || v.shape() != (n, 2) {
        return Err(dim_err("starting_block_rank_two", "U and V must be n x 2"));
    }
    let c = u * &v.adjoint();
    if svd(&c, tol)?.numerical_rank < 2 {
        return Err(Error::Argument("C = U V^H has rank < 2; use the rank-one path".into()));
    }
    let uv = ComplexMatrix::hcat(&[u, v])?;
    if svd(&uv, tol)?.numerical_rank == 4 {
        return Ok(uv);
    }
    let (basis, dim) = commutator_range(a, tol)?;
    if dim > 4 {
        return Err(Error::Contract(format!(
            "range of the commutator has dimension {dim} > 4; C = U V^H is not a certified rank-two perturbation"
        )));
    }
    if dim == 0 {
        return Err(Error::Degenerate("A is normal; S is trivial".into()));
    }
    Ok(basis)
}

/// `C = y x^H − x y^H` for `A = H + x y^H` with `H` Hermitian.
pub fn hermitian_case_c(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    if x.cols() != 1 || y.shape() != x.shape() {
        return Err(dim_err(
            "hermitian_case_c",
            "x and y must be column vectors of equal length",
        ));
    }
    let c = &(y * &x.adjoint()) - &(x * &y.adjoint());
    // enforce exact antisymmetry of the rounding pattern
    antihermitian_part(&c)
}

/// `1 + y^H U^H x`.
pub fn unitary_case_denominator(uu: &ComplexMatrix, x: &ComplexMatrix, y: &ComplexMatrix) -> Complex64 {
    let uhx = uu.adjoint_mul(x);
    Complex64::new(1.0, 0.0) + y.adjoint_mul(&uhx)[(0, 0)]
}

/// `C` for the unitary-plus-rank-one matrix `A = U + x y^H`:
///
/// `C = y x^H + (U^H x)(U y)^H / (1 + y^H U^H x)`,
///
/// which satisfies `A^H A − C A = I` and `A A^H − A C = I`.
pub fn unitary_case_c(uu: &ComplexMatrix, x: &ComplexMatrix, y: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let n = uu.rows();
    if !uu.is_square() || x.shape() != (n, 1) || y.shape() != (n, 1) {
        return Err(dim_err("unitary_case_c", "U must be n x n, x and y n x 1"));
    }
    let denom = unitary_case_denominator(uu, x, y);
    if denom.norm() <= tol {
        return Err(Error::Singular(format!(
            "A not invertible; C formula undefined (|1 + y^H U^H x| = {:.3e})",
            denom.norm()
        )));
    }
    let uhx = uu.adjoint_mul(x);
    let uy = uu * y;
    let c = &(y * &x.adjoint()) + &(&uhx * &uy.adjoint()).scale(denom.inv());
    Ok(c)
}

/// The two defining identities of the unitary case, relative to `‖A‖_F²`:
/// `(‖A^H A − C A − I‖_F, ‖A A^H − A C − I‖_F) / ‖A‖_F²`.
pub fn unitary_identities_residual(a: &ComplexMatrix, c: &ComplexMatrix) -> (f64, f64) {
    let n = a.rows();
    let i = ComplexMatrix::identity(n);
    let a2 = a.frobenius_norm().powi(2).max(f64::MIN_POSITIVE);
    let first = &(&a.adjoint_mul(a) - &(c * a)) - &i;
    let second = &(&(a * &a.adjoint()) - &(a * c)) - &i;
    (first.frobenius_norm() / a2, second.frobenius_norm() / a2)
}

/// Starting block for `A = N + u v^H` with `N` normal on a conic.
///
/// Returns `[u, v, A^H u, A^H v, A u, A v]`, or the reduced
/// `[u, v, A u, A v]` when the conic is an origin-centred circle.
pub fn starting_block_curve(
    a: &ComplexMatrix,
    u: &ComplexMatrix,
    v: &ComplexMatrix,
    conic: &ConicCoefficients,
) -> Result<ComplexMatrix> {
    let n = a.rows();
    require_vector("u", u, n)?;
    require_vector("v", v, n)?;
    if u.frobenius_norm() == 0.0 || v.frobenius_norm() == 0.0 {
        return Err(Error::Argument("u and v must be nonzero".into()));
    }
    let au = a * u;
    let av = a * v;
    if conic.is_centred_circle() {
        return ComplexMatrix::hcat(&[u, v, &au, &av]);
    }
    let ahu = a.adjoint_mul(u);
    let ahv = a.adjoint_mul(v);
    ComplexMatrix::hcat(&[u, v, &ahu, &ahv, &au, &av])
}

/// Orthonormal basis of the span of [`starting_block_curve`]; the width may
/// drop below 6 when the columns are dependent.
pub fn starting_span_curve(
    a: &ComplexMatrix,
    u: &ComplexMatrix,
    v: &ComplexMatrix,
    conic: &ConicCoefficients,
    tol: f64,
) -> Result<ComplexMatrix> {
    Ok(orthonormal_range(&starting_block_curve(a, u, v, conic)?, tol)?.0)
}

/// Relative residual of the unconditional identity
/// `A_H^j A_AH − A_AH A_H^j = ½ Σ_{k<j} A_H^k Δ(A) A_H^{j−1−k}`, which follows
/// from `A_H A_AH − A_AH A_H = Δ(A)/2`.
pub fn lemma31_residual(a: &ComplexMatrix, j: usize) -> Result<f64> {
    if j == 0 {
        return Err(Error::Argument("j must be positive".into()));
    }
    let ah = hermitian_part(a)?;
    let aah = antihermitian_part(a)?;
    let delta = commutator(a)?;
    let n = a.rows();
    let mut powers = vec![ComplexMatrix::identity(n)];
    for k in 1..=j {
        let next = &powers[k - 1] * &ah;
        powers.push(next);
    }
    let lhs = &(&powers[j] * &aah) - &(&aah * &powers[j]);
    let mut sum = ComplexMatrix::zeros(n, n);
    for k in 0..j {
        sum = &sum + &(&(&powers[k] * &delta) * &powers[j - 1 - k]);
    }
    let r = (&lhs - &sum.scale_real(0.5)).frobenius_norm();
    let scale = a.frobenius_norm().powi(j as i32 + 1);
    Ok(if scale == 0.0 { r } else { r / scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::c64;

    fn vec_of(entries: &[(f64, f64)]) -> ComplexMatrix {
        ComplexMatrix::column_vector(&entries.iter().map(|&(a, b)| c64(a, b)).collect::<Vec<_>>())
    }

    #[test]
    fn normal_matrix_certifies_with_zero_c() {
        let a = ComplexMatrix::from_diagonal(&[c64(1.0, 1.0), c64(2.0, -1.0), c64(0.5, 0.0)]);
        let cert = certify(&a, &ComplexMatrix::zeros(3, 3), 0, 1e-12).unwrap();
        assert!(cert.residual <= 1e-14);
        assert_eq!(cert.range_dim, 0);
        assert!(cert.is_valid());
    }

    #[test]
    fn certify_rejects_mismatched_shapes() {
        assert!(certify(&ComplexMatrix::identity(3), &ComplexMatrix::identity(2), 1, 1e-12).is_err());
    }

    #[test]
    fn hermitian_c_instances() {
        let x = vec_of(&[(1.0, 0.5), (0.0, -1.0), (2.0, 0.0)]);
        assert_eq!(hermitian_case_c(&x, &x).unwrap().max_abs(), 0.0);
        let e1 = ComplexMatrix::unit_vector(3, 0);
        let e2 = ComplexMatrix::unit_vector(3, 1);
        let c = hermitian_case_c(&e1, &e2).unwrap();
        let expect = &(&e2 * &e1.adjoint()) - &(&e1 * &e2.adjoint());
        assert_eq!(c, expect);
        assert_eq!((&c + &c.adjoint()).max_abs(), 0.0);
    }

    #[test]
    fn rank_one_block_detects_dependence() {
        let a = ComplexMatrix::identity(3);
        let e1 = ComplexMatrix::unit_vector(3, 0);
        let e2 = ComplexMatrix::unit_vector(3, 1);
        assert_eq!(
            starting_block_rank_one(&a, &e1, &e2, 1e-10).unwrap(),
            ComplexMatrix::hcat(&[&e1, &e2]).unwrap()
        );
        let u = vec_of(&[(1.0, 1.0), (0.0, 2.0), (-1.0, 0.0)]);
        let v = u.scale_real(3.0);
        assert_eq!(starting_block_rank_one(&a, &u, &v, 1e-10).unwrap(), u);
        assert!(matches!(
            starting_block_rank_one(&a, &ComplexMatrix::zeros(3, 1), &e2, 1e-10),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn rank_two_block_passthrough_and_errors() {
        let a = ComplexMatrix::identity(5);
        let u = ComplexMatrix::from_fn(5, 2, |i, j| if i == j { c64(1.0, 0.0) } else { c64(0.0, 0.0) });
        let v = ComplexMatrix::from_fn(5, 2, |i, j| if i == j + 2 { c64(1.0, 0.0) } else { c64(0.0, 0.0) });
        let z = starting_block_rank_two(&a, &u, &v, 1e-10).unwrap();
        assert_eq!(z.cols(), 4);
        let u1 = ComplexMatrix::hcat(&[&u.column(0), &u.column(0)]).unwrap();
        assert!(matches!(
            starting_block_rank_two(&a, &u1, &v, 1e-10),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn unitary_c_with_zero_correction() {
        let uu = ComplexMatrix::from_fn(
            3,
            3,
            |i, j| if (i + 1) % 3 == j { c64(1.0, 0.0) } else { c64(0.0, 0.0) },
        );
        let x = ComplexMatrix::zeros(3, 1);
        let y = vec_of(&[(1.0, 0.0), (2.0, 1.0), (0.0, 0.0)]);
        let c = unitary_case_c(&uu, &x, &y, 1e-12).unwrap();
        assert_eq!(c.max_abs(), 0.0);
        assert!(commutator(&uu).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn unitary_c_rejects_singular_case() {
        // U = I, x = e1, y = -e1 gives A = I - e1 e1^H (singular), denominator 0.
        let uu = ComplexMatrix::identity(3);
        let x = ComplexMatrix::unit_vector(3, 0);
        let y = x.scale_real(-1.0);
        assert!(matches!(unitary_case_c(&uu, &x, &y, 1e-12), Err(Error::Singular(_))));
    }

    #[test]
    fn lemma31_small_cases() {
        let jordan = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(lemma31_residual(&jordan, 1).unwrap() <= 1e-15);
        let herm = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, -1.0]]).unwrap();
        assert_eq!(lemma31_residual(&herm, 3).unwrap(), 0.0);
        assert!(lemma31_residual(&herm, 0).is_err());
    }
}
