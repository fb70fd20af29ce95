//! Seeded constructors for every matrix family used to exercise the
//! reduction: Hermitian- and unitary-plus-rank-one matrices, companion and
//! colleague matrices, the Fourier breakdown example, normal-plus-rank-one
//! matrices with spectra on a conic, and numerically solved commutator
//! equations.
//!
//! Randomness comes from ChaCha8 seeded with the user seed, with one stream
//! per family (and per retry) so instances of different families never share
//! draws. Gaussians use the ziggurat sampler of `rand_distr`; complex
//! Gaussians are `(g1 + i g2)/√2`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::almostnormal::{
    certify, commutator_range, conic_fit, hermitian_case_c, hypothesis1_rotation, starting_block_rank_one,
    starting_span_curve, unitary_case_c, CommutatorCertificate, ConicCoefficients, INDEPENDENCE_TOL,
};
use crate::error::{Error, Result};
use crate::matcore::{c64, commutator, hermitian_part, orthonormal_range, qr, svd, ComplexMatrix, DEFAULT_RANK_TOL};

/// Residual threshold used when certifying generated instances.
pub const CERTIFICATE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    ArrowH1,
    HermitianH1,
    UnitaryU1,
    Companion,
    ChebyshevColleague,
    FourierSum,
    CurveNormalH1,
    SolvedCommutator,
}

impl Family {
    fn stream(self) -> u64 {
        match self {
            Family::ArrowH1 => 1,
            Family::HermitianH1 => 2,
            Family::UnitaryU1 => 3,
            Family::Companion => 4,
            Family::ChebyshevColleague => 5,
            Family::FourierSum => 6,
            Family::CurveNormalH1 => 7,
            Family::SolvedCommutator => 8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::ArrowH1 => "arrow_h1",
            Family::HermitianH1 => "hermitian_h1",
            Family::UnitaryU1 => "unitary_u1",
            Family::Companion => "companion",
            Family::ChebyshevColleague => "chebyshev_colleague",
            Family::FourierSum => "fourier_sum",
            Family::CurveNormalH1 => "curve_normal_h1",
            Family::SolvedCommutator => "solved_commutator",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let all = [
            Family::ArrowH1,
            Family::HermitianH1,
            Family::UnitaryU1,
            Family::Companion,
            Family::ChebyshevColleague,
            Family::FourierSum,
            Family::CurveNormalH1,
            Family::SolvedCommutator,
        ];
        all.into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown family {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curve {
    Circle,
    Line,
    ParabolaArc,
}

impl FromStr for Curve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(Curve::Circle),
            "line" => Ok(Curve::Line),
            "parabola-arc" | "parabola_arc" => Ok(Curve::ParabolaArc),
            other => Err(Error::Argument(format!("unknown curve {other:?}"))),
        }
    }
}

/// A generated matrix `A = base + left · right^H` with its structural data.
#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub matrix: ComplexMatrix,
    pub family: Family,
    /// The structured part: `H`, the unitary, or the normal `N`.
    pub base: ComplexMatrix,
    /// `x` / `u` (one column) or `U` (two columns).
    pub left: ComplexMatrix,
    /// `y` / `v` (one column) or `V` (two columns).
    pub right: ComplexMatrix,
    pub certificate: Option<CommutatorCertificate>,
    pub seed: u64,
    /// Spectrum of the normal part for curve instances.
    pub eigenvalues: Option<Vec<Complex64>>,
    pub conic: Option<ConicCoefficients>,
}

impl GeneratedInstance {
    /// `‖A − (base + left · right^H)‖_F / max(1, ‖A‖_F)`.
    pub fn reconstruction_residual(&self) -> f64 {
        let rebuilt = &self.base + &(&self.left * &self.right.adjoint());
        (&self.matrix - &rebuilt).frobenius_norm() / self.matrix.frobenius_norm().max(1.0)
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }
}

pub(crate) fn rng_for(family: Family, seed: u64, attempt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(family.stream() << 32 | attempt);
    rng
}

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    c64(gaussian(rng), gaussian(rng)) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn random_unit_vector(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let v = gaussian_matrix(n, 1, rng);
    let norm = v.frobenius_norm();
    v.scale_real(1.0 / norm)
}

/// Haar-distributed unitary from the QR factorisation of a complex Gaussian
/// matrix, with the phases of `diag(R)` folded into `Q`.
pub fn haar_unitary(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = gaussian_matrix(n, n, rng);
    let (mut q, r) = qr(&g);
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `A = H + x y^H` with `C = y x^H − x y^H`.
pub fn hermitian_plus_rank_one(
    h: &ComplexMatrix,
    x: &ComplexMatrix,
    y: &ComplexMatrix,
    family: Family,
    seed: u64,
) -> Result<GeneratedInstance> {
    let a = h + &(x * &y.adjoint());
    let c = hermitian_case_c(x, y)?;
    let cert = certify(&a, &c, 2, CERTIFICATE_TOL)?;
    Ok(GeneratedInstance {
        matrix: a,
        family,
        base: h.clone(),
        left: x.clone(),
        right: y.clone(),
        certificate: Some(cert),
        seed,
        eigenvalues: None,
        conic: None,
    })
}

/// Real arrow matrix (diagonal plus first row and column) plus a rank-one
/// correction with random unit `x`, `y`.
pub fn arrow_hermitian_plus_rank_one(n: usize, seed: u64) -> Result<GeneratedInstance> {
    if n < 3 {
        return Err(Error::Argument(format!("arrow matrices need n >= 3, got {n}")));
    }
    let mut rng = rng_for(Family::ArrowH1, seed, 0);
    let mut h = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let d: f64 = rng.random_range(1.0..2.0);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        h[(i, i)] = c64(sign * d, 0.0);
    }
    for i in 1..n {
        let w = gaussian(&mut rng);
        h[(0, i)] = c64(w, 0.0);
        h[(i, 0)] = c64(w, 0.0);
    }
    let x = random_unit_vector(n, &mut rng);
    let y = random_unit_vector(n, &mut rng);
    hermitian_plus_rank_one(&h, &x, &y, Family::ArrowH1, seed)
}

/// `A = U + x y^H` with the unitary-case `C` when it exists.
pub fn unitary_plus_rank_one(
    uu: &ComplexMatrix,
    x: &ComplexMatrix,
    y: &ComplexMatrix,
    family: Family,
    seed: u64,
) -> Result<GeneratedInstance> {
    let a = uu + &(x * &y.adjoint());
    let certificate = match unitary_case_c(uu, x, y, 1e-12) {
        Ok(c) => Some(certify(&a, &c, 2, CERTIFICATE_TOL)?),
        Err(Error::Singular(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(GeneratedInstance {
        matrix: a,
        family,
        base: uu.clone(),
        left: x.clone(),
        right: y.clone(),
        certificate,
        seed,
        eigenvalues: None,
        conic: None,
    })
}

/// Haar unitary plus a random rank-one term, redrawn (at most 16 times)
/// while `|1 + y^H U^H x| ≤ 1e-6`.
pub fn random_unitary_plus_rank_one(n: usize, seed: u64) -> Result<GeneratedInstance> {
    if n < 2 {
        return Err(Error::Argument(format!("need n >= 2, got {n}")));
    }
    for attempt in 0..16 {
        let mut rng = rng_for(Family::UnitaryU1, seed, attempt);
        let uu = haar_unitary(n, &mut rng);
        let x = random_unit_vector(n, &mut rng);
        let y = random_unit_vector(n, &mut rng);
        let denom = crate::almostnormal::unitary_case_denominator(&uu, &x, &y);
        if denom.norm() <= 1e-6 {
            continue;
        }
        return unitary_plus_rank_one(&uu, &x, &y, Family::UnitaryU1, seed);
    }
    Err(Error::Generation(
        "no invertible unitary-plus-rank-one draw in 16 attempts".into(),
    ))
}

/// Companion matrix of the monic polynomial with coefficients in descending
/// order `[1, c_{n−1}, …, c_0]`: first row `−c_{n−1} … −c_0`, ones on the
/// subdiagonal. Decomposed as the cyclic shift plus `e_1 y^H`.
pub fn companion(coeffs: &[Complex64]) -> Result<GeneratedInstance> {
    if coeffs.len() < 3 {
        return Err(Error::Argument("companion needs degree >= 2".into()));
    }
    if coeffs[0] != c64(1.0, 0.0) {
        return Err(Error::Argument(
            "companion needs a monic polynomial (leading coefficient 1)".into(),
        ));
    }
    let n = coeffs.len() - 1;
    let shift = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j + 1 || (i == 0 && j == n - 1) {
            c64(1.0, 0.0)
        } else {
            c64(0.0, 0.0)
        }
    });
    let x = ComplexMatrix::unit_vector(n, 0);
    // y^H = [−c_{n−1}, …, −c_1, −c_0 − 1]
    let mut yh: Vec<Complex64> = coeffs[1..].iter().map(|&c| -c).collect();
    yh[n - 1] -= c64(1.0, 0.0);
    let y = ComplexMatrix::column_vector(&yh.iter().map(|z| z.conj()).collect::<Vec<_>>());
    unitary_plus_rank_one(&shift, &x, &y, Family::Companion, 0)
}

/// Companion matrix of a monic polynomial with complex Gaussian coefficients
/// (constant term kept away from zero).
pub fn random_companion(degree: usize, seed: u64) -> Result<GeneratedInstance> {
    let mut rng = rng_for(Family::Companion, seed, 0);
    let mut coeffs = vec![c64(1.0, 0.0)];
    for _ in 0..degree {
        coeffs.push(complex_gaussian(&mut rng));
    }
    while coeffs[degree].norm() < 1e-3 {
        coeffs[degree] = complex_gaussian(&mut rng);
    }
    let mut inst = companion(&coeffs)?;
    inst.seed = seed;
    Ok(inst)
}

/// Colleague matrix of `Σ_k c_k T_k` (coefficients in ascending order,
/// `c_d ≠ 0`): the symmetric Jacobi matrix of the Chebyshev polynomials in
/// the basis `T_0, √2 T_1, …` plus a correction in the last row.
pub fn chebyshev_colleague(coeffs: &[Complex64]) -> Result<GeneratedInstance> {
    if coeffs.len() < 3 {
        return Err(Error::Argument("colleague matrix needs degree >= 2".into()));
    }
    let d = coeffs.len() - 1;
    let lead = coeffs[d];
    if lead.norm() == 0.0 {
        return Err(Error::Argument("leading Chebyshev coefficient is zero".into()));
    }
    let half = c64(0.5, 0.0);
    let h = ComplexMatrix::from_fn(d, d, |i, j| {
        if i.abs_diff(j) != 1 {
            c64(0.0, 0.0)
        } else if i.min(j) == 0 {
            c64(std::f64::consts::FRAC_1_SQRT_2, 0.0)
        } else {
            half
        }
    });
    // last row correction w^T = −(√2 c_0, c_1, …, c_{d−1}) / (2 c_d)
    let w: Vec<Complex64> = (0..d)
        .map(|k| {
            let ck = if k == 0 {
                coeffs[0] * std::f64::consts::SQRT_2
            } else {
                coeffs[k]
            };
            -ck / (lead * 2.0)
        })
        .collect();
    let x = ComplexMatrix::unit_vector(d, d - 1);
    let y = ComplexMatrix::column_vector(&w.iter().map(|z| z.conj()).collect::<Vec<_>>());
    hermitian_plus_rank_one(&h, &x, &y, Family::ChebyshevColleague, 0)
}

pub fn random_chebyshev_colleague(degree: usize, seed: u64) -> Result<GeneratedInstance> {
    let mut rng = rng_for(Family::ChebyshevColleague, seed, 0);
    let mut coeffs: Vec<Complex64> = (0..=degree).map(|_| complex_gaussian(&mut rng)).collect();
    while coeffs[degree].norm() < 1e-3 {
        coeffs[degree] = complex_gaussian(&mut rng);
    }
    let mut inst = chebyshev_colleague(&coeffs)?;
    inst.seed = seed;
    Ok(inst)
}

/// Unitary DFT matrix `F_{jk} = ω^{jk}/√n`, `ω = e^{−2πi/n}`.
pub fn fourier_matrix(n: usize) -> ComplexMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    ComplexMatrix::from_fn(n, n, |j, k| {
        let e = ((j * k) % n) as f64;
        Complex64::from_polar(scale, -2.0 * PI * e / n as f64)
    })
}

/// `H = F + F^H` and `Z = [z, F z]` for a seeded random `z`.
pub fn fourier_sum(n: usize, seed: u64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::Argument(format!("fourier_sum needs even n >= 4, got {n}")));
    }
    let f = fourier_matrix(n);
    let h = hermitian_part(&(&f + &f.adjoint()))?;
    let mut rng = rng_for(Family::FourierSum, seed, 0);
    let z = gaussian_matrix(n, 1, &mut rng);
    let fz = &f * &z;
    Ok((h, ComplexMatrix::hcat(&[&z, &fz])?))
}

pub fn curve_points(n: usize, curve: Curve, rng: &mut impl Rng) -> Vec<Complex64> {
    match curve {
        Curve::Circle => (0..n)
            .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI)))
            .collect(),
        Curve::Line => (0..n).map(|_| c64(rng.random_range(-1.0..1.0), 0.0)).collect(),
        Curve::ParabolaArc => (0..n)
            .map(|j| {
                let t = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
                c64(t, t * t)
            })
            .collect(),
    }
}

/// `A = N + u v^H` with `N = Q diag(λ) Q^H`, `Q` Haar and `λ_j` on the curve.
pub fn curve_normal_plus_rank_one(n: usize, curve: Curve, seed: u64) -> Result<GeneratedInstance> {
    if n < 4 {
        return Err(Error::Argument(format!("curve instances need n >= 4, got {n}")));
    }
    let mut rng = rng_for(Family::CurveNormalH1, seed, 0);
    let lambdas = curve_points(n, curve, &mut rng);
    let q = haar_unitary(n, &mut rng);
    let normal = &(&q * &ComplexMatrix::from_diagonal(&lambdas)) * &q.adjoint();
    let u = random_unit_vector(n, &mut rng);
    let v = random_unit_vector(n, &mut rng);
    let a = &normal + &(&u * &v.adjoint());
    let conic = conic_fit(&lambdas, 1e-10)?;
    Ok(GeneratedInstance {
        matrix: a,
        family: Family::CurveNormalH1,
        base: normal,
        left: u,
        right: v,
        certificate: None,
        seed,
        eigenvalues: Some(lambdas),
        conic: Some(conic),
    })
}

/// Options for [`solve_commutator_equation_small`].
pub const SOLVER_RESTARTS: usize = 8;
const SOLVER_DAMPING: f64 = 1e-8;

/// Finds `X` with `[X, X^H] = C X − X C` for a rank-one `C` by damped
/// Gauss-Newton on the real parametrisation of `X`, from seeded random
/// starting points. `C = 0` returns a random normal matrix directly.
pub fn solve_commutator_equation_small(
    c: &ComplexMatrix,
    n: usize,
    seed: u64,
    max_iters: usize,
) -> Result<GeneratedInstance> {
    if n > 16 || n == 0 {
        return Err(Error::Argument(format!("solver limited to 1 <= n <= 16, got {n}")));
    }
    if c.shape() != (n, n) {
        return Err(Error::Argument("C must be n x n".into()));
    }
    let c_svd = svd(c, DEFAULT_RANK_TOL)?;
    if c_svd.numerical_rank > 1 {
        return Err(Error::Argument("C must have rank at most one".into()));
    }
    let (u, v) = if c_svd.numerical_rank == 1 {
        let s = c_svd.singular_values[0];
        (
            c_svd.left_vectors.column(0).scale_real(s),
            c_svd.right_vectors.column(0),
        )
    } else {
        (ComplexMatrix::zeros(n, 1), ComplexMatrix::zeros(n, 1))
    };

    if c_svd.numerical_rank == 0 {
        let mut rng = rng_for(Family::SolvedCommutator, seed, 0);
        let q = haar_unitary(n, &mut rng);
        let d: Vec<Complex64> = (0..n).map(|_| complex_gaussian(&mut rng)).collect();
        let x = &(&q * &ComplexMatrix::from_diagonal(&d)) * &q.adjoint();
        let cert = certify(&x, c, 1, CERTIFICATE_TOL)?;
        return Ok(GeneratedInstance {
            matrix: x.clone(),
            family: Family::SolvedCommutator,
            base: x,
            left: u,
            right: v,
            certificate: Some(cert),
            seed,
            eigenvalues: None,
            conic: None,
        });
    }

    let mut best = f64::INFINITY;
    for attempt in 0..=SOLVER_RESTARTS as u64 {
        let mut rng = rng_for(Family::SolvedCommutator, seed, attempt);
        let x0 = gaussian_matrix(n, n, &mut rng).scale_real(1.0 / (n as f64).sqrt());
        let (x, rel) = gauss_newton(c, x0, max_iters);
        let scale = x.frobenius_norm().powi(2).max(1.0);
        let nonnormal = commutator(&x)?.frobenius_norm() / scale;
        if rel <= 1e-10 && nonnormal > 1e-6 {
            let base = &x - &(&u * &v.adjoint());
            let cert = certify(&x, c, 1, CERTIFICATE_TOL)?;
            return Ok(GeneratedInstance {
                matrix: x,
                family: Family::SolvedCommutator,
                base,
                left: u,
                right: v,
                certificate: Some(cert),
                seed,
                eigenvalues: None,
                conic: None,
            });
        }
        best = best.min(rel);
    }
    Err(Error::SolverFailure {
        residual: best,
        restarts: SOLVER_RESTARTS,
    })
}

fn equation_residual(c: &ComplexMatrix, x: &ComplexMatrix) -> ComplexMatrix {
    let delta = &x.adjoint_mul(x) - &(x * &x.adjoint());
    &delta - &(&(c * x) - &(x * c))
}

fn flatten(m: &ComplexMatrix) -> DVector<f64> {
    let s = m.as_slice();
    DVector::from_iterator(2 * s.len(), s.iter().map(|z| z.re).chain(s.iter().map(|z| z.im)))
}

/// Returns the final iterate and its residual relative to `max(1, ‖X‖_F²)`.
fn gauss_newton(c: &ComplexMatrix, mut x: ComplexMatrix, max_iters: usize) -> (ComplexMatrix, f64) {
    let n = x.rows();
    let p = 2 * n * n;
    let rel = |x: &ComplexMatrix| equation_residual(c, x).frobenius_norm() / x.frobenius_norm().powi(2).max(1.0);
    let mut r = equation_residual(c, &x);
    let mut cost = r.frobenius_norm();
    let mut damping = SOLVER_DAMPING;
    for _ in 0..max_iters {
        if rel(&x) <= 1e-12 {
            break;
        }
        // Jacobian of R(X) = X^H X − X X^H − C X + X C, column by column
        let xh = x.adjoint();
        let mut jac = DMatrix::<f64>::zeros(p, p);
        for k in 0..p {
            let idx = k % (n * n);
            let (i, j) = (idx / n, idx % n);
            let val = if k < n * n { c64(1.0, 0.0) } else { c64(0.0, 1.0) };
            let mut e = ComplexMatrix::zeros(n, n);
            e[(i, j)] = val;
            let eh = e.adjoint();
            let d = &(&(&(&eh * &x) + &(&xh * &e)) - &(&(&e * &xh) + &(&x * &eh))) - &(&(c * &e) - &(&e * c));
            jac.set_column(k, &flatten(&d));
        }
        let rv = flatten(&r);
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * rv;
        let mut accepted = false;
        for _ in 0..12 {
            let mut m = jtj.clone();
            for d in 0..p {
                m[(d, d)] += damping;
            }
            let Some(chol) = m.cholesky() else {
                damping *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&jtr));
            let mut trial = x.clone();
            for idx in 0..n * n {
                let (i, j) = (idx / n, idx % n);
                trial[(i, j)] += c64(step[idx], step[n * n + idx]);
            }
            let tr = equation_residual(c, &trial);
            let tc = tr.frobenius_norm();
            if tc < cost {
                x = trial;
                r = tr;
                cost = tc;
                damping = (damping / 10.0).max(SOLVER_DAMPING);
                accepted = true;
                break;
            }
            damping *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    let rr = rel(&x);
    (x, rr)
}

/// Starting block and rotation used by the automatic reduction pipeline.
#[derive(Clone, Debug)]
pub struct ReductionSetup {
    /// The matrix whose Hermitian part is reduced (`e^{iθ} A` for curves).
    pub rotated: ComplexMatrix,
    pub theta: f64,
    pub start: ComplexMatrix,
}

/// Picks the starting block for a family:
///
/// * Hermitian-plus-rank-one: `range(C) = span{x, y}`;
/// * unitary-plus-rank-one and companion: a basis of `range(Δ(A))`;
/// * solved commutator: the rank-one rule on the factors of `C`;
/// * curve: the six-vector block for `e^{iθ} A`, with `θ` from the
///   rotation that keeps `a20 + a02 − a11` away from zero;
/// * Fourier sum: `start` must be supplied.
///
/// Falls back to `e_1` when the relevant subspace is trivial (normal `A`).
pub fn auto_starting_block(
    family: Family,
    a: &ComplexMatrix,
    c: Option<&ComplexMatrix>,
    factors: Option<(&ComplexMatrix, &ComplexMatrix)>,
    conic: Option<&ConicCoefficients>,
    start: Option<&ComplexMatrix>,
    tol: f64,
) -> Result<ReductionSetup> {
    let n = a.rows();
    let e1 = ComplexMatrix::unit_vector(n, 0);
    let plain = |start: ComplexMatrix| ReductionSetup {
        rotated: a.clone(),
        theta: 0.0,
        start,
    };
    let nonempty = |(q, s): (ComplexMatrix, usize)| if s == 0 { e1.clone() } else { q };
    match family {
        Family::ArrowH1 | Family::HermitianH1 | Family::ChebyshevColleague => {
            let c = c.ok_or_else(|| Error::Argument("Hermitian-plus-rank-one start needs C".into()))?;
            Ok(plain(nonempty(orthonormal_range(c, tol)?)))
        }
        Family::UnitaryU1 | Family::Companion => Ok(plain(nonempty(commutator_range(a, tol)?))),
        Family::SolvedCommutator => {
            let c = c.ok_or_else(|| Error::Argument("solved-commutator start needs C".into()))?;
            let s = svd(c, tol)?;
            if s.numerical_rank == 0 {
                return Ok(plain(e1));
            }
            let u = s.left_vectors.column(0).scale_real(s.singular_values[0]);
            let v = s.right_vectors.column(0);
            Ok(plain(starting_block_rank_one(a, &u, &v, INDEPENDENCE_TOL)?))
        }
        Family::CurveNormalH1 => {
            let conic = conic.ok_or_else(|| Error::Argument("curve start needs the fitted conic".into()))?;
            let (u, v) = factors.ok_or_else(|| Error::Argument("curve start needs u and v".into()))?;
            let rotated_conic = match hypothesis1_rotation(conic) {
                Ok(r) => r,
                Err(Error::LinearVariety) => conic.clone(),
                Err(e) => return Err(e),
            };
            let theta = rotated_conic.theta - conic.theta;
            let rot = Complex64::from_polar(1.0, theta);
            let ar = a.scale(rot);
            let z = starting_span_curve(&ar, u, v, &rotated_conic, tol)?;
            Ok(ReductionSetup {
                rotated: ar,
                theta,
                start: z,
            })
        }
        Family::FourierSum => {
            let z = start.ok_or_else(|| Error::Argument("fourier-sum reduction needs Z".into()))?;
            Ok(plain(z.clone()))
        }
    }
}
