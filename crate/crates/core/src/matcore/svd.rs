//! One-sided (Hestenes) Jacobi SVD for dense complex matrices.
//!
//! Columns of a working copy of `M` are rotated pairwise until every pair is
//! orthogonal to within a relative threshold; the column norms are then the
//! singular values and the accumulated rotations the right singular vectors.
//! Wide matrices are handled through `M^H`.

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Maximum number of full sweeps before giving up.
pub const JACOBI_SWEEP_LIMIT: usize = 30;

/// Relative orthogonality threshold for a column pair.
pub const JACOBI_TOL: f64 = 1e-15;

#[derive(Clone, Debug)]
pub struct SvdResult {
    /// `m × k` with orthonormal columns, `k = min(m, n)`.
    pub left_vectors: ComplexMatrix,
    /// Nonincreasing, nonnegative.
    pub singular_values: Vec<f64>,
    /// `n × k` with orthonormal columns.
    pub right_vectors: ComplexMatrix,
    /// Count of singular values above `tol · σ_max` for the requested `tol`.
    pub numerical_rank: usize,
}

impl SvdResult {
    /// Number of singular values strictly above an absolute threshold.
    pub fn rank_above(&self, threshold: f64) -> usize {
        self.singular_values.iter().filter(|&&s| s > threshold).count()
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let k = self.singular_values.len();
        let mut us = self.left_vectors.clone();
        for j in 0..k {
            for i in 0..us.rows() {
                us[(i, j)] *= self.singular_values[j];
            }
        }
        &us * &self.right_vectors.adjoint()
    }
}

/// Thin SVD `M = Q Σ V^H` with numerical rank counted against `tol · σ_max`.
///
/// A zero matrix has rank 0. Fails only when the Jacobi sweeps do not settle
/// within [`JACOBI_SWEEP_LIMIT`].
pub fn svd(m: &ComplexMatrix, tol: f64) -> Result<SvdResult> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Argument(format!("svd tolerance must be positive, got {tol}")));
    }
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::Argument("svd of an empty matrix".into()));
    }
    let (left, sigma, right) = if m.rows() >= m.cols() {
        one_sided_jacobi(m)?
    } else {
        let (l, s, r) = one_sided_jacobi(&m.adjoint())?;
        (r, s, l)
    };
    let smax = sigma.first().copied().unwrap_or(0.0);
    let numerical_rank = if smax > 0.0 {
        sigma.iter().filter(|&&s| s > tol * smax).count()
    } else {
        0
    };
    Ok(SvdResult {
        left_vectors: left,
        singular_values: sigma,
        right_vectors: right,
        numerical_rank,
    })
}

/// Requires `rows >= cols`.
fn one_sided_jacobi(m: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
    let (rows, n) = m.shape();
    let mut a: Vec<Vec<Complex64>> = (0..n).map(|j| m.column_entries(j)).collect();
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut col = vec![Complex64::new(0.0, 0.0); n];
            col[j] = Complex64::new(1.0, 0.0);
            col
        })
        .collect();

    // Inner products of orthogonal columns are only computed to about
    // rows·eps, so the pair threshold cannot be tighter than that.
    let pair_tol = JACOBI_TOL.max(f64::EPSILON * rows as f64);
    let negligible = f64::EPSILON * f64::EPSILON * m.frobenius_norm();

    let mut converged = n < 2;
    let mut worst = 0.0;
    for _sweep in 0..JACOBI_SWEEP_LIMIT {
        let mut rotated = false;
        worst = 0.0f64;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (ap, aq) = (&a[p], &a[q]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = Complex64::new(0.0, 0.0);
                    for (x, y) in ap.iter().zip(aq) {
                        alpha += x.norm_sqr();
                        beta += y.norm_sqr();
                        gamma += x.conj() * y;
                    }
                    (alpha, beta, gamma)
                };
                let g = gamma.norm();
                let scale = alpha.sqrt() * beta.sqrt();
                if g == 0.0 || scale == 0.0 {
                    continue;
                }
                // columns annihilated down to roundoff carry no information
                if alpha.min(beta).sqrt() <= negligible {
                    continue;
                }
                worst = worst.max(g / scale);
                if g <= pair_tol * scale {
                    continue;
                }
                rotated = true;

                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let phase = (gamma / g).conj();
                rotate(&mut a, p, q, c, s, phase);
                rotate(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps: JACOBI_SWEEP_LIMIT,
            residual: worst,
        });
    }

    let sigma: Vec<f64> = a
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));

    let mut left = ComplexMatrix::zeros(rows, n);
    let mut right = ComplexMatrix::zeros(n, n);
    let mut sorted = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        let s = sigma[src];
        sorted.push(s);
        for i in 0..n {
            right[(i, dst)] = v[src][i];
        }
        if s > f64::MIN_POSITIVE * 1e8 {
            for i in 0..rows {
                left[(i, dst)] = a[src][i] / s;
            }
        } else {
            missing.push(dst);
        }
    }
    if !missing.is_empty() {
        complete_orthonormal(&mut left, &missing);
    }
    Ok((left, sorted, right))
}

/// Applies `[a_p, a_q e^{-iφ}] · [[c, s], [-s, c]]` to the column pair.
fn rotate(cols: &mut [Vec<Complex64>], p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let yq = *y * phase;
        *x = xp * c - yq * s;
        *y = xp * s + yq * c;
    }
}

/// Fills the listed columns of `q` with unit vectors orthogonal to every
/// other column, drawing candidates from the canonical basis.
pub(crate) fn complete_orthonormal(q: &mut ComplexMatrix, missing: &[usize]) {
    let rows = q.rows();
    let mut filled: Vec<bool> = vec![true; q.cols()];
    for &j in missing {
        filled[j] = false;
    }
    for &j in missing {
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        for e in 0..rows {
            let mut cand = vec![Complex64::new(0.0, 0.0); rows];
            cand[e] = Complex64::new(1.0, 0.0);
            for _pass in 0..2 {
                for k in (0..q.cols()).filter(|&k| filled[k]) {
                    let dot: Complex64 = (0..rows).map(|i| q[(i, k)].conj() * cand[i]).sum();
                    for (i, c) in cand.iter_mut().enumerate() {
                        *c -= q[(i, k)] * dot;
                    }
                }
            }
            let norm = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if best.as_ref().is_none_or(|(b, _)| norm > *b + 1e-12) {
                best = Some((norm, cand));
            }
        }
        let (norm, cand) = best.expect("rows >= 1");
        for (i, c) in cand.into_iter().enumerate() {
            q[(i, j)] = c / norm;
        }
        filled[j] = true;
    }
}
