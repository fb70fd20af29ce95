//! Degree-2 curves through eigenvalues, written both as a real conic
//! `f(x, y) = a x² + b y² + c xy + d x + e y + f` and as the polyanalytic
//! polynomial `p(z) = a20 z² + a11 z z̄ + a02 z̄² + a10 z + a01 z̄ + a00`
//! obtained through `x = (z + z̄)/2`, `y = (z − z̄)/(2i)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{svd, ComplexMatrix, DEFAULT_RANK_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealConic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl RealConic {
    pub fn as_array(&self) -> [f64; 6] {
        [self.a, self.b, self.c, self.d, self.e, self.f]
    }

    fn from_array(v: [f64; 6]) -> Self {
        Self {
            a: v[0],
            b: v[1],
            c: v[2],
            d: v[3],
            e: v[4],
            f: v[5],
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.a * x * x + self.b * y * y + self.c * x * y + self.d * x + self.e * y + self.f
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConicCoefficients {
    pub a20: Complex64,
    pub a11: Complex64,
    pub a02: Complex64,
    pub a10: Complex64,
    pub a01: Complex64,
    pub a00: Complex64,
    pub real_form: RealConic,
    /// Accumulated rotation: these coefficients describe `e^{iθ}·λ`.
    pub theta: f64,
    /// Largest `|f(Re λ, Im λ)|` over the fitted points (0 when built by hand).
    pub max_residual: f64,
    /// Set when the fit is not unique (too few points or a multi-dimensional
    /// nullspace).
    pub degenerate: bool,
}

impl ConicCoefficients {
    pub fn from_real(rf: RealConic) -> Self {
        let i = Complex64::new(0.0, 1.0);
        let a20 = Complex64::new((rf.a - rf.b) / 4.0, 0.0) - i * (rf.c / 4.0);
        let a10 = Complex64::new(rf.d / 2.0, 0.0) - i * (rf.e / 2.0);
        Self {
            a20,
            a11: Complex64::new((rf.a + rf.b) / 2.0, 0.0),
            a02: a20.conj(),
            a10,
            a01: a10.conj(),
            a00: Complex64::new(rf.f, 0.0),
            real_form: rf,
            theta: 0.0,
            max_residual: 0.0,
            degenerate: false,
        }
    }

    /// Builds the coefficients from `a20, a11, a10, a00`, completing the rest
    /// by conjugate symmetry (`a11` and `a00` must be real).
    pub fn from_polyanalytic(a20: Complex64, a11: f64, a10: Complex64, a00: f64) -> Self {
        let rf = real_form_of(a20, a11, a10, a00);
        let mut c = Self::from_real(rf);
        // keep the caller's exact values rather than the round trip
        c.a20 = a20;
        c.a02 = a20.conj();
        c.a11 = Complex64::new(a11, 0.0);
        c.a10 = a10;
        c.a01 = a10.conj();
        c.a00 = Complex64::new(a00, 0.0);
        c
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let zb = z.conj();
        self.a20 * z * z + self.a11 * z * zb + self.a02 * zb * zb + self.a10 * z + self.a01 * zb + self.a00
    }

    /// `|a20| + |a02| + |a11|`.
    pub fn quadratic_scale(&self) -> f64 {
        self.a20.norm() + self.a02.norm() + self.a11.norm()
    }

    pub fn coefficient_norm(&self) -> f64 {
        [self.a20, self.a11, self.a02, self.a10, self.a01, self.a00]
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Circle `|z|² = r²` centred at the origin.
    pub fn is_centred_circle(&self) -> bool {
        let eps = 1e-10 * self.coefficient_norm();
        self.a20.norm() <= eps
            && self.a02.norm() <= eps
            && self.a10.norm() <= eps
            && self.a01.norm() <= eps
            && self.a11.re * self.a00.re < 0.0
    }

    /// Coefficients of the curve carrying `e^{iθ}λ` for `λ` on this curve.
    pub fn rotated(&self, theta: f64) -> Self {
        let e1 = Complex64::from_polar(1.0, -theta);
        let e2 = e1 * e1;
        let a20 = self.a20 * e2;
        let a10 = self.a10 * e1;
        let mut out = self.clone();
        out.a20 = a20;
        out.a02 = a20.conj();
        out.a10 = a10;
        out.a01 = a10.conj();
        out.real_form = real_form_of(a20, self.a11.re, a10, self.a00.re);
        out.theta = self.theta + theta;
        out
    }
}

fn real_form_of(a20: Complex64, a11: f64, a10: Complex64, a00: f64) -> RealConic {
    let amb = 4.0 * a20.re;
    let apb = 2.0 * a11;
    RealConic {
        a: (apb + amb) / 2.0,
        b: (apb - amb) / 2.0,
        c: -4.0 * a20.im,
        d: 2.0 * a10.re,
        e: -2.0 * a10.im,
        f: a00,
    }
}

/// Fits a degree-2 real curve through the points, returning the unit-norm
/// coefficient vector of least residual.
///
/// Collinear points are reported as the line through them (the quadratic
/// part is zero). When the quadratic fit is not unique, the nullspace vector
/// with the largest `|a + b|` is taken. The sign is normalised so that the
/// first nonzero coefficient is positive.
pub fn conic_fit(points: &[Complex64], tol: f64) -> Result<ConicCoefficients> {
    let first = *points
        .first()
        .ok_or_else(|| Error::Degenerate("no points to fit".into()))?;
    let spread = points.iter().map(|p| (p - first).norm()).fold(0.0, f64::max);
    if spread <= 1e-14 * (1.0 + first.norm()) {
        return Err(Error::Degenerate("all points coincide".into()));
    }

    let eval_max = |rf: &RealConic| points.iter().map(|p| rf.eval(p.re, p.im).abs()).fold(0.0, f64::max);

    // line first: the minimal-degree curve wins
    let line = least_squares_null(points, &[3, 4, 5], tol)?;
    let line_rf = RealConic::from_array(line.0);
    let line_res = eval_max(&line_rf);
    let (rf, residual, degenerate) = if line_res <= tol {
        (line_rf, line_res, points.len() < 2)
    } else {
        let (v, null_dim) = least_squares_null(points, &[0, 1, 2, 3, 4, 5], tol)?;
        let rf = RealConic::from_array(v);
        (rf, eval_max(&rf), points.len() < 5 || null_dim > 1)
    };
    if residual > tol {
        return Err(Error::NotOnCurve { residual, tol });
    }
    let mut c = ConicCoefficients::from_real(rf);
    c.max_residual = residual;
    c.degenerate = degenerate;
    Ok(c)
}

/// Unit vector over the chosen monomials (indices into
/// `[x², y², xy, x, y, 1]`) minimising the residual, plus the dimension of
/// the numerical nullspace.
fn least_squares_null(points: &[Complex64], monomials: &[usize], tol: f64) -> Result<([f64; 6], usize)> {
    let k = monomials.len();
    let rows = points.len().max(k);
    let mut m = ComplexMatrix::zeros(rows, k);
    for (i, p) in points.iter().enumerate() {
        let (x, y) = (p.re, p.im);
        let all = [x * x, y * y, x * y, x, y, 1.0];
        for (j, &mono) in monomials.iter().enumerate() {
            m[(i, j)] = Complex64::new(all[mono], 0.0);
        }
    }
    let dec = svd(&m, DEFAULT_RANK_TOL)?;
    let sigma = &dec.singular_values;
    let cutoff = tol * dec.sigma_max().max(1.0);
    let null_dim = sigma.iter().filter(|&&s| s <= cutoff).count().max(1);
    let null = dec.right_vectors.columns(k - null_dim..k);

    let mut v: Vec<Complex64> = if null_dim > 1 {
        // prefer the direction with the largest |a + b|
        let mut target = ComplexMatrix::zeros(k, 1);
        for (j, &mono) in monomials.iter().enumerate() {
            if mono < 2 {
                target[(j, 0)] = Complex64::new(1.0, 0.0);
            }
        }
        let proj = &null * &null.adjoint_mul(&target);
        if proj.frobenius_norm() > 1e-8 {
            proj.column_entries(0)
        } else {
            null.column_entries(null_dim - 1)
        }
    } else {
        null.column_entries(0)
    };

    // strip the arbitrary complex phase: real data has real null vectors
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or_default();
    if pivot.norm() > 0.0 {
        let phase = (pivot / pivot.norm()).conj();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
    let mut out = [0.0; 6];
    for (j, &mono) in monomials.iter().enumerate() {
        out[mono] = v[j].re;
    }
    let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        out.iter_mut().for_each(|x| *x /= norm);
    }
    if let Some(lead) = out.iter().find(|x| x.abs() > 1e-12) {
        if *lead < 0.0 {
            out.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok((out, null_dim))
}

/// `a20 e^{−2iθ} + a02 e^{2iθ} − a11` for the given extra rotation.
pub fn hypothesis1_quantity(c: &ConicCoefficients, theta: f64) -> Complex64 {
    let e2 = Complex64::from_polar(1.0, -2.0 * theta);
    c.a20 * e2 + c.a02 * e2.conj() - c.a11
}

const ROTATION_GRID: usize = 64;

/// Rotates the curve so that `|a20 + a02 − a11| ≥ 0.1 · (|a20| + |a02| + |a11|)`.
///
/// Returns the input unchanged when it already satisfies the bound;
/// otherwise maximises the quantity over a 64-point grid of `[0, π)` and
/// refines with a golden-section search.
pub fn hypothesis1_rotation(c: &ConicCoefficients) -> Result<ConicCoefficients> {
    let quad = c.quadratic_scale();
    if quad <= 1e-14 * c.coefficient_norm().max(f64::MIN_POSITIVE) {
        return Err(Error::LinearVariety);
    }
    let merit = |t: f64| hypothesis1_quantity(c, t).norm();
    if merit(0.0) >= 0.1 * quad {
        return Ok(c.clone());
    }
    let step = PI / ROTATION_GRID as f64;
    let best = (0..ROTATION_GRID)
        .max_by(|&i, &j| merit(i as f64 * step).total_cmp(&merit(j as f64 * step)))
        .expect("grid is not empty");
    let (mut lo, mut hi) = ((best as f64 - 1.0) * step, (best as f64 + 1.0) * step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (merit(x1), merit(x2));
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = merit(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = merit(x1);
        }
    }
    let mut theta = 0.5 * (lo + hi);
    if merit(theta) < merit(best as f64 * step) {
        theta = best as f64 * step;
    }
    Ok(c.rotated(theta))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LeadingVariant {
    /// `α(z − z̄)z + β(z + z̄)z + γ(z + z̄)z̄`
    First,
    /// `α(z − z̄)z̄ + β(z + z̄)z + γ(z + z̄)z̄`
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LeadingPart {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
}

/// Solves for `(α, β, γ)` so that the chosen combination reproduces the
/// quadratic part `a20 z² + a11 z z̄ + a02 z̄²`. Requires `a20 + a02 − a11 ≠ 0`.
pub fn leading_part_decomposition(c: &ConicCoefficients, variant: LeadingVariant) -> Result<LeadingPart> {
    let q = c.a20 + c.a02 - c.a11;
    let quad = c.quadratic_scale();
    if quad == 0.0 || q.norm() <= 1e-12 * quad {
        return Err(Error::Contract(format!(
            "a20 + a02 - a11 = {q} vanishes; rotate the curve first"
        )));
    }
    Ok(match variant {
        LeadingVariant::First => {
            let alpha = q / 2.0;
            LeadingPart {
                alpha,
                beta: c.a20 - alpha,
                gamma: c.a02,
            }
        }
        LeadingVariant::Second => {
            let alpha = -q / 2.0;
            LeadingPart {
                alpha,
                beta: c.a20,
                gamma: c.a02 + alpha,
            }
        }
    })
}

/// Largest relative mismatch between the decomposition and the quadratic
/// part over the sample points.
pub fn leading_form_residual(
    c: &ConicCoefficients,
    part: &LeadingPart,
    variant: LeadingVariant,
    samples: &[Complex64],
) -> f64 {
    let quad = c.quadratic_scale().max(f64::MIN_POSITIVE);
    samples
        .iter()
        .map(|&z| {
            let zb = z.conj();
            let first = match variant {
                LeadingVariant::First => part.alpha * (z - zb) * z,
                LeadingVariant::Second => part.alpha * (z - zb) * zb,
            };
            let lhs = first + part.beta * (z + zb) * z + part.gamma * (z + zb) * zb;
            let rhs = c.a20 * z * z + c.a11 * z * zb + c.a02 * zb * zb;
            (lhs - rhs).norm() / (quad * z.norm_sqr().max(1.0))
        })
        .fold(0.0, f64::max)
}
