//! Python bindings for the `blocktri` crate.
//!
//! Matrices cross the boundary as nested lists of Python complex numbers
//! (`Matrix(rows)` / `Matrix.to_rows()`); NumPy arrays convert through
//! `tolist()` and `numpy.array(m.to_rows())`.

use blocktri::almostnormal::{self, ConicCoefficients};
use blocktri::generators::{self, Curve, Family, GeneratedInstance};
use blocktri::matcore::{self, ComplexMatrix};
use blocktri::{interchange, lanczos, structure, Error};
use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::Parse { .. } => PyIOError::new_err(e.to_string()),
        Error::NoConvergence { .. } | Error::SolverFailure { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Dense complex matrix.
#[pyclass(name = "Matrix", module = "blocktri_py", from_py_object)]
#[derive(Clone)]
pub struct Matrix {
    inner: ComplexMatrix,
}

impl From<ComplexMatrix> for Matrix {
    fn from(inner: ComplexMatrix) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl Matrix {
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        Ok(ComplexMatrix::from_rows(&rows).map_err(py_err)?.into())
    }

    #[staticmethod]
    fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix::zeros(rows, cols).into()
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        ComplexMatrix::identity(n).into()
    }

    fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.inner.rows())
            .map(|i| (0..self.inner.cols()).map(|j| self.inner[(i, j)]).collect())
            .collect()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    fn __getitem__(&self, idx: (usize, usize)) -> PyResult<Complex64> {
        let (r, c) = self.inner.shape();
        if idx.0 >= r || idx.1 >= c {
            return Err(PyValueError::new_err(format!("index {idx:?} out of range for {r}x{c}")));
        }
        Ok(self.inner[idx])
    }

    fn adjoint(&self) -> Self {
        self.inner.adjoint().into()
    }

    fn frobenius_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    fn __matmul__(&self, other: &Matrix) -> PyResult<Self> {
        Ok(self.inner.try_matmul(&other.inner).map_err(py_err)?.into())
    }

    fn __add__(&self, other: &Matrix) -> PyResult<Self> {
        if self.inner.shape() != other.inner.shape() {
            return Err(PyValueError::new_err("shape mismatch"));
        }
        Ok((&self.inner + &other.inner).into())
    }

    fn __sub__(&self, other: &Matrix) -> PyResult<Self> {
        if self.inner.shape() != other.inner.shape() {
            return Err(PyValueError::new_err("shape mismatch"));
        }
        Ok((&self.inner - &other.inner).into())
    }

    fn __repr__(&self) -> String {
        let (r, c) = self.inner.shape();
        format!("Matrix({r}x{c}, frobenius_norm={:.6e})", self.inner.frobenius_norm())
    }
}

/// Result of a block Lanczos reduction.
#[pyclass(module = "blocktri_py", get_all)]
pub struct Reduction {
    basis: Matrix,
    trid: Matrix,
    block_sizes: Vec<usize>,
    /// `(step, columns_completed)` per breakdown.
    breakdown_events: Vec<(usize, usize)>,
    unitarity_residual: f64,
}

impl From<lanczos::BlockTridiagonalization> for Reduction {
    fn from(r: lanczos::BlockTridiagonalization) -> Self {
        Self {
            unitarity_residual: r.unitarity_residual(),
            breakdown_events: r
                .breakdown_events
                .iter()
                .map(|e| (e.step, e.columns_completed))
                .collect(),
            block_sizes: r.block_sizes,
            basis: r.basis.into(),
            trid: r.trid.into(),
        }
    }
}

#[pymethods]
impl Reduction {
    /// `U^H M U`.
    fn project(&self, m: &Matrix) -> PyResult<Matrix> {
        let u = &self.basis.inner;
        if m.inner.shape() != (u.rows(), u.rows()) {
            return Err(PyValueError::new_err("matrix does not match the basis"));
        }
        Ok(u.adjoint_mul(&(&m.inner * u)).into())
    }

    fn __repr__(&self) -> String {
        format!(
            "Reduction(block_sizes={:?}, breakdowns={})",
            self.block_sizes,
            self.breakdown_events.len()
        )
    }
}

#[pyclass(module = "blocktri_py", get_all)]
pub struct Certificate {
    residual: f64,
    perturbation_rank: usize,
    range_dim: usize,
    claimed_rank: usize,
    valid: bool,
}

impl From<&almostnormal::CommutatorCertificate> for Certificate {
    fn from(c: &almostnormal::CommutatorCertificate) -> Self {
        Self {
            residual: c.residual,
            perturbation_rank: c.perturbation_rank,
            range_dim: c.range_dim,
            claimed_rank: c.claimed_rank,
            valid: c.is_valid(),
        }
    }
}

#[pymethods]
impl Certificate {
    fn __repr__(&self) -> String {
        format!(
            "Certificate(residual={:.3e}, rank_c={}, dim_s={}, valid={})",
            self.residual, self.perturbation_rank, self.range_dim, self.valid
        )
    }
}

/// Polyanalytic coefficients `(a20, a11, a02, a10, a01, a00)` of a fitted conic.
#[pyclass(module = "blocktri_py", skip_from_py_object)]
#[derive(Clone)]
pub struct Conic {
    #[pyo3(get)]
    a20: Complex64,
    #[pyo3(get)]
    a11: Complex64,
    #[pyo3(get)]
    a02: Complex64,
    #[pyo3(get)]
    a10: Complex64,
    #[pyo3(get)]
    a01: Complex64,
    #[pyo3(get)]
    a00: Complex64,
    #[pyo3(get)]
    theta: f64,
    #[pyo3(get)]
    max_residual: f64,
    inner: ConicCoefficients,
}

impl From<ConicCoefficients> for Conic {
    fn from(c: ConicCoefficients) -> Self {
        Self {
            a20: c.a20,
            a11: c.a11,
            a02: c.a02,
            a10: c.a10,
            a01: c.a01,
            a00: c.a00,
            theta: c.theta,
            max_residual: c.max_residual,
            inner: c,
        }
    }
}

#[pymethods]
impl Conic {
    fn eval(&self, z: Complex64) -> Complex64 {
        self.inner.eval(z)
    }

    /// Real form `(a, b, c, d, e, f)` of `a x² + b y² + c xy + d x + e y + f`.
    #[getter]
    fn real_form(&self) -> [f64; 6] {
        self.inner.real_form.as_array()
    }

    /// `(alpha, beta, gamma)` of the leading-part decomposition, variant 1 or 2.
    fn leading_part(&self, variant: u8) -> PyResult<(Complex64, Complex64, Complex64)> {
        let v = match variant {
            1 => almostnormal::LeadingVariant::First,
            2 => almostnormal::LeadingVariant::Second,
            _ => return Err(PyValueError::new_err("variant must be 1 or 2")),
        };
        let p = almostnormal::leading_part_decomposition(&self.inner, v).map_err(py_err)?;
        Ok((p.alpha, p.beta, p.gamma))
    }
}

/// A generated test instance `A = base + left · right^H`.
#[pyclass(module = "blocktri_py", get_all)]
pub struct Instance {
    family: String,
    seed: u64,
    matrix: Matrix,
    base: Matrix,
    left: Matrix,
    right: Matrix,
    perturbation: Option<Matrix>,
    certificate: Option<Py<Certificate>>,
    conic: Option<Conic>,
}

fn instance(py: Python<'_>, g: GeneratedInstance) -> PyResult<Instance> {
    let certificate = match &g.certificate {
        Some(c) => Some(Py::new(py, Certificate::from(c))?),
        None => None,
    };
    Ok(Instance {
        family: g.family.name().to_string(),
        seed: g.seed,
        perturbation: g.certificate.as_ref().map(|c| c.perturbation.clone().into()),
        certificate,
        conic: g.conic.map(Conic::from),
        matrix: g.matrix.into(),
        base: g.base.into(),
        left: g.left.into(),
        right: g.right.into(),
    })
}

/// `A^H A − A A^H`.
#[pyfunction]
fn commutator(a: &Matrix) -> PyResult<Matrix> {
    Ok(matcore::commutator(&a.inner).map_err(py_err)?.into())
}

#[pyfunction]
fn hermitian_part(a: &Matrix) -> PyResult<Matrix> {
    Ok(matcore::hermitian_part(&a.inner).map_err(py_err)?.into())
}

/// Singular values of `m`, largest first.
#[pyfunction]
fn singular_values(m: &Matrix) -> PyResult<Vec<f64>> {
    Ok(matcore::svd(&m.inner, matcore::DEFAULT_RANK_TOL)
        .map_err(py_err)?
        .singular_values)
}

#[pyfunction]
#[pyo3(signature = (a, c, k, tol = 1e-10))]
fn certify(a: &Matrix, c: &Matrix, k: usize, tol: f64) -> PyResult<Certificate> {
    Ok((&almostnormal::certify(&a.inner, &c.inner, k, tol).map_err(py_err)?).into())
}

/// Orthonormal basis of `range([A, A^H])`.
#[pyfunction]
#[pyo3(signature = (a, tol = 1e-10))]
fn commutator_range(a: &Matrix, tol: f64) -> PyResult<Matrix> {
    Ok(almostnormal::commutator_range(&a.inner, tol).map_err(py_err)?.0.into())
}

#[pyfunction]
#[pyo3(signature = (h, z, tol = 1e-10))]
fn block_lanczos(h: &Matrix, z: &Matrix, tol: f64) -> PyResult<Reduction> {
    Ok(lanczos::block_lanczos(&h.inner, &z.inner, tol).map_err(py_err)?.into())
}

/// Reduces a generated instance with the starting block appropriate to its
/// family. Returns the reduction and the rotation angle applied to `A`.
#[pyfunction]
#[pyo3(signature = (inst, tol = 1e-10))]
fn reduce_instance(inst: &Instance, tol: f64) -> PyResult<(Reduction, f64)> {
    let family: Family = inst.family.parse().map_err(py_err)?;
    let setup = generators::auto_starting_block(
        family,
        &inst.matrix.inner,
        inst.perturbation.as_ref().map(|m| &m.inner),
        Some((&inst.left.inner, &inst.right.inner)),
        inst.conic.as_ref().map(|c| &c.inner),
        None,
        tol,
    )
    .map_err(py_err)?;
    let h = matcore::hermitian_part(&setup.rotated).map_err(py_err)?;
    let red = lanczos::block_lanczos(&h, &setup.start, tol).map_err(py_err)?;
    Ok((red.into(), setup.theta))
}

#[pyfunction]
#[pyo3(signature = (a, j))]
fn lemma31_residual(a: &Matrix, j: usize) -> PyResult<f64> {
    almostnormal::lemma31_residual(&a.inner, j).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (points, tol = 1e-10))]
fn conic_fit(points: Vec<Complex64>, tol: f64) -> PyResult<Conic> {
    Ok(almostnormal::conic_fit(&points, tol).map_err(py_err)?.into())
}

/// Block sizes of the detected block tridiagonal profile.
#[pyfunction]
#[pyo3(signature = (t, tol = 1e-10))]
fn block_profile(t: &Matrix, tol: f64) -> PyResult<Vec<usize>> {
    Ok(structure::block_profile(&t.inner, tol).map_err(py_err)?.block_sizes)
}

/// Runs tracked QR steps; returns the per-step maximal off-profile rank and
/// `C_k` residual.
#[pyfunction]
#[pyo3(signature = (a, c, steps, tol = 1e-10))]
fn qr_track(a: &Matrix, c: &Matrix, steps: usize, tol: f64) -> PyResult<Vec<(usize, f64)>> {
    let rep = structure::qr_iteration_tracked(&a.inner, &c.inner, steps, tol).map_err(py_err)?;
    Ok(rep
        .iterations
        .iter()
        .map(|r| {
            (
                r.off_profile_block_ranks.iter().copied().max().unwrap_or(0),
                r.c_residual,
            )
        })
        .collect())
}

#[pyfunction]
fn eigenvalues(a: &Matrix) -> PyResult<Vec<Complex64>> {
    structure::dense_eigenvalues(&a.inner).map_err(py_err)
}

#[pyfunction]
fn arrow_hermitian_plus_rank_one(py: Python<'_>, n: usize, seed: u64) -> PyResult<Instance> {
    instance(py, generators::arrow_hermitian_plus_rank_one(n, seed).map_err(py_err)?)
}

#[pyfunction]
fn random_unitary_plus_rank_one(py: Python<'_>, n: usize, seed: u64) -> PyResult<Instance> {
    instance(py, generators::random_unitary_plus_rank_one(n, seed).map_err(py_err)?)
}

/// Companion matrix of a monic polynomial, coefficients in descending order.
#[pyfunction]
fn companion(py: Python<'_>, coeffs: Vec<Complex64>) -> PyResult<Instance> {
    instance(py, generators::companion(&coeffs).map_err(py_err)?)
}

#[pyfunction]
fn random_companion(py: Python<'_>, degree: usize, seed: u64) -> PyResult<Instance> {
    instance(py, generators::random_companion(degree, seed).map_err(py_err)?)
}

/// Colleague matrix, Chebyshev coefficients in ascending order.
#[pyfunction]
fn chebyshev_colleague(py: Python<'_>, coeffs: Vec<Complex64>) -> PyResult<Instance> {
    instance(py, generators::chebyshev_colleague(&coeffs).map_err(py_err)?)
}

/// `curve` is one of `circle`, `line`, `parabola-arc`.
#[pyfunction]
fn curve_normal_plus_rank_one(py: Python<'_>, n: usize, curve: &str, seed: u64) -> PyResult<Instance> {
    let curve: Curve = curve.parse().map_err(py_err)?;
    instance(
        py,
        generators::curve_normal_plus_rank_one(n, curve, seed).map_err(py_err)?,
    )
}

#[pyfunction]
#[pyo3(signature = (c, n, seed, max_iters = 200))]
fn solve_commutator_equation(py: Python<'_>, c: &Matrix, n: usize, seed: u64, max_iters: usize) -> PyResult<Instance> {
    instance(
        py,
        generators::solve_commutator_equation_small(&c.inner, n, seed, max_iters).map_err(py_err)?,
    )
}

/// `(H, Z)` with `H = F + F^H` for the unitary DFT matrix `F`.
#[pyfunction]
fn fourier_sum(n: usize, seed: u64) -> PyResult<(Matrix, Matrix)> {
    let (h, z) = generators::fourier_sum(n, seed).map_err(py_err)?;
    Ok((h.into(), z.into()))
}

#[pyfunction]
fn read_matrix_market(path: &str) -> PyResult<Matrix> {
    Ok(interchange::read_matrix_market(path).map_err(py_err)?.into())
}

#[pyfunction]
fn write_matrix_market(path: &str, m: &Matrix) -> PyResult<()> {
    interchange::write_matrix_market(path, &m.inner).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (t, tol = 1e-12))]
fn spy(t: &Matrix, tol: f64) -> String {
    interchange::spy_ascii(&t.inner, tol)
}

#[pymodule]
fn blocktri_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Matrix>()?;
    m.add_class::<Reduction>()?;
    m.add_class::<Certificate>()?;
    m.add_class::<Conic>()?;
    m.add_class::<Instance>()?;
    m.add_function(wrap_pyfunction!(commutator, m)?)?;
    m.add_function(wrap_pyfunction!(hermitian_part, m)?)?;
    m.add_function(wrap_pyfunction!(singular_values, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(commutator_range, m)?)?;
    m.add_function(wrap_pyfunction!(block_lanczos, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_instance, m)?)?;
    m.add_function(wrap_pyfunction!(lemma31_residual, m)?)?;
    m.add_function(wrap_pyfunction!(conic_fit, m)?)?;
    m.add_function(wrap_pyfunction!(block_profile, m)?)?;
    m.add_function(wrap_pyfunction!(qr_track, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(arrow_hermitian_plus_rank_one, m)?)?;
    m.add_function(wrap_pyfunction!(random_unitary_plus_rank_one, m)?)?;
    m.add_function(wrap_pyfunction!(companion, m)?)?;
    m.add_function(wrap_pyfunction!(random_companion, m)?)?;
    m.add_function(wrap_pyfunction!(chebyshev_colleague, m)?)?;
    m.add_function(wrap_pyfunction!(curve_normal_plus_rank_one, m)?)?;
    m.add_function(wrap_pyfunction!(solve_commutator_equation, m)?)?;
    m.add_function(wrap_pyfunction!(fourier_sum, m)?)?;
    m.add_function(wrap_pyfunction!(read_matrix_market, m)?)?;
    m.add_function(wrap_pyfunction!(write_matrix_market, m)?)?;
    m.add_function(wrap_pyfunction!(spy, m)?)?;
    Ok(())
}
