//! Block-tridiagonal profiles of reduced matrices and rank tracking under
//! explicitly shifted QR steps.

use std::ops::Range;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{dim_err, Error, Result};
use crate::lanczos::offsets;
use crate::matcore::{commutator, qr, svd, ComplexMatrix, DEFAULT_RANK_TOL};

/// Largest block size accepted as the starting profile of
/// [`qr_iteration_tracked`].
pub const MAX_TRACKED_BLOCK: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockProfile {
    pub block_sizes: Vec<usize>,
    pub max_block: usize,
    pub off_profile_norm: f64,
}

impl BlockProfile {
    pub fn from_sizes(sizes: Vec<usize>) -> Self {
        let max_block = sizes.iter().copied().max().unwrap_or(0);
        Self {
            block_sizes: sizes,
            max_block,
            off_profile_norm: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    pub fn boundaries(&self) -> Vec<Range<usize>> {
        offsets(&self.block_sizes)
            .into_iter()
            .zip(&self.block_sizes)
            .map(|(o, &s)| o..o + s)
            .collect()
    }

    fn block_index(&self) -> Vec<usize> {
        self.block_sizes
            .iter()
            .enumerate()
            .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
            .collect()
    }
}

/// Frobenius norm of the entries of `t` outside the block tridiagonal
/// envelope of `profile`.
pub fn off_profile_residual(t: &ComplexMatrix, profile: &BlockProfile) -> Result<f64> {
    if !t.is_square() || profile.n() != t.rows() {
        return Err(dim_err(
            "off_profile_residual",
            format!(
                "profile covers {} rows, matrix is {}x{}",
                profile.n(),
                t.rows(),
                t.cols()
            ),
        ));
    }
    if profile.block_sizes.contains(&0) {
        return Err(Error::Argument("profile blocks must be nonempty".into()));
    }
    let idx = profile.block_index();
    let mut acc = 0.0;
    for i in 0..t.rows() {
        for j in 0..t.cols() {
            if idx[i].abs_diff(idx[j]) > 1 {
                acc += t[(i, j)].norm_sqr();
            }
        }
    }
    Ok(acc.sqrt())
}

/// Detects the block tridiagonal profile of `t`: entries with magnitude
/// `≤ tol · ‖T‖_F` are treated as zero.
///
/// For each choice of first block, later boundaries are placed as early as
/// the significant entries allow; the candidate with the smallest largest
/// block wins, then the one with more blocks.
pub fn block_profile(t: &ComplexMatrix, tol: f64) -> Result<BlockProfile> {
    if !t.is_square() {
        return Err(dim_err("block_profile", "matrix must be square"));
    }
    let n = t.rows();
    let thresh = tol * t.frobenius_norm();
    // reach[i]: furthest index coupled to i in either direction
    let reach: Vec<usize> = (0..n)
        .map(|i| {
            (i..n)
                .rev()
                .find(|&j| t[(i, j)].norm() > thresh || t[(j, i)].norm() > thresh)
                .unwrap_or(i)
        })
        .collect();
    let mut prefix_reach = vec![0usize; n];
    let mut m = 0;
    for i in 0..n {
        m = m.max(reach[i]);
        prefix_reach[i] = m;
    }

    let mut best: Option<Vec<usize>> = None;
    for first in 1..=n {
        let mut sizes = vec![first];
        let mut end = first;
        while end < n {
            let next = (prefix_reach[end - 1] + 1).max(end + 1).min(n);
            sizes.push(next - end);
            end = next;
        }
        let better = match &best {
            None => true,
            Some(b) => {
                let (mb, mc) = (b.iter().max().unwrap(), sizes.iter().max().unwrap());
                mc < mb || (mc == mb && sizes.len() > b.len())
            }
        };
        if better {
            best = Some(sizes);
        }
    }
    let mut profile = BlockProfile::from_sizes(best.unwrap_or_default());
    profile.off_profile_norm = off_profile_residual(t, &profile)?;
    Ok(profile)
}

#[derive(Clone, Debug, Serialize)]
pub struct QrStepRecord {
    pub step: usize,
    pub shift: [f64; 2],
    /// Numerical ranks of the maximal upper submatrices outside the initial
    /// profile: rows of blocks `0..=k`, columns of blocks `k+2..`.
    pub off_profile_block_ranks: Vec<usize>,
    /// `‖Δ(A_k) − (C_k A_k − A_k C_k)‖_F / ‖A_k‖_F²`.
    pub c_residual: f64,
    /// Norm of the part of `A_k` below the initial lower profile, relative to `‖A_k‖_F`.
    pub profile_growth: f64,
    /// Size of the still-active leading window after this step.
    pub active: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct QrTrackReport {
    pub initial_profile: BlockProfile,
    pub iterations: Vec<QrStepRecord>,
    pub converged_eigenvalues: Vec<[f64; 2]>,
    #[serde(skip)]
    pub final_matrix: ComplexMatrix,
    #[serde(skip)]
    pub final_perturbation: ComplexMatrix,
}

impl QrTrackReport {
    pub fn max_off_profile_rank(&self) -> usize {
        self.iterations
            .iter()
            .flat_map(|r| r.off_profile_block_ranks.iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn max_c_residual(&self) -> f64 {
        self.iterations.iter().map(|r| r.c_residual).fold(0.0, f64::max)
    }
}

/// Wilkinson shift of the trailing 2×2 of the leading `m × m` window: the
/// eigenvalue closer to the last diagonal entry.
pub fn wilkinson_shift(a: &ComplexMatrix, m: usize) -> Complex64 {
    if m < 2 {
        return a[(0, 0)];
    }
    let (p, q) = (m - 2, m - 1);
    let (a11, a12, a21, a22) = (a[(p, p)], a[(p, q)], a[(q, p)], a[(q, q)]);
    let tr = a11 + a22;
    let det = a11 * a22 - a12 * a21;
    let disc = (tr * tr / 4.0 - det).sqrt();
    let l1 = tr / 2.0 + disc;
    let l2 = tr / 2.0 - disc;
    if (l1 - a22).norm() <= (l2 - a22).norm() {
        l1
    } else {
        l2
    }
}

/// Runs `steps` explicit single-shift QR steps on the block tridiagonal `a0`
/// while carrying `C_k = Q_k^H C_{k−1} Q_k`, recording the ranks of the
/// upper blocks outside the initial profile after each step.
///
/// `tol` is used for profile detection, numerical ranks (relative to
/// `‖A_k‖_F`) and deflation of the trailing row.
pub fn qr_iteration_tracked(a0: &ComplexMatrix, c0: &ComplexMatrix, steps: usize, tol: f64) -> Result<QrTrackReport> {
    if !a0.is_square() || a0.shape() != c0.shape() {
        return Err(dim_err(
            "qr_iteration_tracked",
            "A0 and C0 must be square of equal size",
        ));
    }
    let n = a0.rows();
    let profile = block_profile(a0, tol)?;
    if profile.max_block > MAX_TRACKED_BLOCK {
        return Err(Error::Contract(format!(
            "input is not block tridiagonal with blocks <= {MAX_TRACKED_BLOCK} (detected block of size {}); run `blocktri reduce` first",
            profile.max_block
        )));
    }
    let bounds = profile.boundaries();
    let block_of = profile.block_index();

    let mut a = a0.clone();
    let mut c = c0.clone();
    let mut active = n;
    let mut converged = Vec::new();
    let mut iterations = Vec::with_capacity(steps);

    for step in 1..=steps {
        let anorm = a.frobenius_norm();
        while active > 1 {
            let coupling: f64 = (0..active - 1)
                .map(|j| a[(active - 1, j)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if coupling <= tol * anorm {
                let lam = a[(active - 1, active - 1)];
                converged.push([lam.re, lam.im]);
                active -= 1;
            } else {
                break;
            }
        }
        if active == 1 {
            let lam = a[(0, 0)];
            converged.push([lam.re, lam.im]);
            active = 0;
        }
        let mut shift = Complex64::new(0.0, 0.0);
        if active >= 2 {
            shift = wilkinson_shift(&a, active);
            let window = a.block(0..active, 0..active).shift_diagonal(-shift);
            let (qw, _) = qr(&window);
            let mut q = ComplexMatrix::identity(n);
            q.set_block(0, 0, &qw);
            a = q.adjoint_mul(&(&a * &q));
            c = q.adjoint_mul(&(&c * &q));
        }

        let anorm = a.frobenius_norm();
        let delta = commutator(&a)?;
        let c_residual = (&delta - &(&(&c * &a) - &(&a * &c))).frobenius_norm() / anorm.powi(2).max(f64::MIN_POSITIVE);

        let mut ranks = Vec::new();
        for k in 0..bounds.len().saturating_sub(2) {
            let rows = 0..bounds[k].end;
            let cols = bounds[k + 2].start..n;
            let sub = a.block(rows, cols);
            let s = svd(&sub, DEFAULT_RANK_TOL)?;
            ranks.push(s.rank_above(tol * anorm));
        }
        let mut below = 0.0;
        for i in 0..n {
            for j in 0..i {
                if block_of[i] > block_of[j] + 1 {
                    below += a[(i, j)].norm_sqr();
                }
            }
        }
        iterations.push(QrStepRecord {
            step,
            shift: [shift.re, shift.im],
            off_profile_block_ranks: ranks,
            c_residual,
            profile_growth: below.sqrt() / anorm.max(f64::MIN_POSITIVE),
            active,
        });
    }

    Ok(QrTrackReport {
        initial_profile: profile,
        iterations,
        converged_eigenvalues: converged,
        final_matrix: a,
        final_perturbation: c,
    })
}

/// Reference eigensolver: Householder reduction to Hessenberg form followed
/// by Wilkinson-shifted complex QR with deflation.
pub fn dense_eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(dim_err("dense_eigenvalues", "matrix must be square"));
    }
    let n = a.rows();
    let mut h = hessenberg(a);
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n;
    let mut iter = 0usize;
    let max_iter = 100 * n.max(1);
    while hi > 0 {
        if hi == 1 {
            eigs.push(h[(0, 0)]);
            break;
        }
        // find the start of the unreduced trailing block
        let mut lo = hi - 1;
        while lo > 0 {
            let s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let s = if s == 0.0 { h.frobenius_norm() } else { s };
            if h[(lo, lo - 1)].norm() <= f64::EPSILON * s {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            eigs.push(h[(hi - 1, hi - 1)]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > max_iter {
            return Err(Error::NoConvergence {
                sweeps: iter,
                residual: h[(hi - 1, hi - 2)].norm(),
            });
        }
        let mut shift = {
            let (p, q) = (hi - 2, hi - 1);
            let (a11, a12, a21, a22) = (h[(p, p)], h[(p, q)], h[(q, p)], h[(q, q)]);
            let tr = a11 + a22;
            let det = a11 * a22 - a12 * a21;
            let disc = (tr * tr / 4.0 - det).sqrt();
            let (l1, l2) = (tr / 2.0 + disc, tr / 2.0 - disc);
            if (l1 - a22).norm() <= (l2 - a22).norm() {
                l1
            } else {
                l2
            }
        };
        if iter.is_multiple_of(11) {
            // exceptional shift against cycling
            shift += Complex64::new(h[(hi - 1, hi - 2)].norm(), 0.0);
        }
        hessenberg_qr_step(&mut h, lo, hi, shift);
    }
    Ok(eigs)
}

fn hessenberg(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] += phase * norm;
        let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vn == 0.0 {
            continue;
        }
        let tau = 2.0 / vn;
        for j in 0..n {
            let dot: Complex64 = v.iter().enumerate().map(|(t, vi)| vi.conj() * h[(k + 1 + t, j)]).sum();
            for (t, vi) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= vi * dot * tau;
            }
        }
        for i in 0..n {
            let dot: Complex64 = v.iter().enumerate().map(|(t, vi)| h[(i, k + 1 + t)] * vi).sum();
            for (t, vi) in v.iter().enumerate() {
                h[(i, k + 1 + t)] -= dot * tau * vi.conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    h
}

/// One shifted QR step on the Hessenberg window `lo..hi` via Givens rotations.
fn hessenberg_qr_step(h: &mut ComplexMatrix, lo: usize, hi: usize, shift: Complex64) {
    let n = h.rows();
    for i in lo..hi {
        h[(i, i)] -= shift;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for k in lo..hi - 1 {
        let (x, y) = (h[(k, k)], h[(k + 1, k)]);
        let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            (x / r, y / r)
        };
        // G = [[c̄, s̄], [−s, c]] applied from the left
        for j in k..n {
            let (p, q) = (h[(k, j)], h[(k + 1, j)]);
            h[(k, j)] = c.conj() * p + s.conj() * q;
            h[(k + 1, j)] = -s * p + c * q;
        }
        rots.push((c, s));
    }
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let k = lo + idx;
        let top = (k + 2).min(hi);
        for i in 0..top {
            let (p, q) = (h[(i, k)], h[(i, k + 1)]);
            h[(i, k)] = p * c + q * s;
            h[(i, k + 1)] = -p * s.conj() + q * c.conj();
        }
    }
    for i in lo..hi {
        h[(i, i)] += shift;
    }
}

/// Largest distance between two spectra after greedy nearest matching.
pub fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut pool: Vec<Complex64> = b.to_vec();
    let mut worst = 0.0f64;
    let mut sorted = a.to_vec();
    sorted.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    for z in sorted {
        let (k, d) = pool
            .iter()
            .enumerate()
            .map(|(k, w)| (k, (z - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("equal lengths");
        worst = worst.max(d);
        pool.swap_remove(k);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::c64;

    fn tridiagonal(n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => c64(1.0 + i as f64, 0.0),
            1 => c64(0.5, 0.0),
            _ => c64(0.0, 0.0),
        })
    }

    #[test]
    fn scalar_tridiagonal_profile() {
        let p = block_profile(&tridiagonal(6), 1e-12).unwrap();
        assert_eq!(p.block_sizes, vec![1; 6]);
        assert_eq!(p.off_profile_norm, 0.0);
    }

    #[test]
    fn dense_matrix_has_coarse_profile() {
        let t = ComplexMatrix::from_fn(6, 6, |i, j| c64(1.0 + (i * j) as f64, 1.0));
        let p = block_profile(&t, 1e-12).unwrap();
        assert!(p.block_sizes.len() <= 2, "{:?}", p.block_sizes);
        assert_eq!(p.off_profile_norm, 0.0);
    }

    #[test]
    fn two_by_two_blocks_are_recovered() {
        let sizes = [2usize, 2, 2, 2];
        let prof = BlockProfile::from_sizes(sizes.to_vec());
        let idx = prof.block_index();
        let t = ComplexMatrix::from_fn(8, 8, |i, j| {
            if idx[i].abs_diff(idx[j]) <= 1 {
                c64(1.0 + (i + j) as f64, 0.5)
            } else {
                c64(0.0, 0.0)
            }
        });
        let p = block_profile(&t, 1e-12).unwrap();
        assert_eq!(p.max_block, 2);
        assert_eq!(p.off_profile_norm, 0.0);
    }

    #[test]
    fn off_profile_against_given_profiles() {
        let t = ComplexMatrix::from_fn(5, 5, |i, j| c64((i + 2 * j) as f64, 1.0));
        assert_eq!(
            off_profile_residual(&t, &BlockProfile::from_sizes(vec![5])).unwrap(),
            0.0
        );
        let d = ComplexMatrix::from_diagonal(&(1..=5).map(|k| c64(k as f64, 0.0)).collect::<Vec<_>>());
        assert_eq!(
            off_profile_residual(&d, &BlockProfile::from_sizes(vec![1; 5])).unwrap(),
            0.0
        );
        assert!(off_profile_residual(&t, &BlockProfile::from_sizes(vec![2, 2])).is_err());
    }

    #[test]
    fn tol_monotonicity_of_profile() {
        let t = ComplexMatrix::from_fn(8, 8, |i, j| c64(10f64.powi(-(i.abs_diff(j) as i32) * 3), 0.0));
        let mut last = usize::MAX;
        for tol in [1e-16, 1e-12, 1e-8, 1e-5, 1e-2] {
            let p = block_profile(&t, tol).unwrap();
            assert!(p.max_block <= last);
            last = p.max_block;
        }
    }

    #[test]
    fn hermitian_tridiagonal_qr_keeps_ranks_zero() {
        let a = tridiagonal(8);
        let rep = qr_iteration_tracked(&a, &ComplexMatrix::zeros(8, 8), 10, 1e-10).unwrap();
        assert_eq!(rep.iterations.len(), 10);
        assert_eq!(rep.max_off_profile_rank(), 0);
        assert!(rep.max_c_residual() < 1e-12);
    }

    #[test]
    fn qr_tracking_rejects_dense_input() {
        let a = ComplexMatrix::from_fn(12, 12, |i, j| c64(1.0 + i as f64, j as f64));
        assert!(matches!(
            qr_iteration_tracked(&a, &ComplexMatrix::zeros(12, 12), 3, 1e-10),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn reference_eigensolver_on_known_spectra() {
        let d = [c64(1.0, 2.0), c64(-3.0, 0.5), c64(0.25, -1.0), c64(2.0, 0.0)];
        let u = ComplexMatrix::from_fn(4, 4, |i, j| {
            c64(((i + 1) * (j + 2)) as f64 % 5.0, (i as f64 - j as f64) * 0.3)
        });
        let (q, _) = qr(&u);
        let a = &(&q * &ComplexMatrix::from_diagonal(&d)) * &q.adjoint();
        let eigs = dense_eigenvalues(&a).unwrap();
        assert!(spectrum_distance(&eigs, &d) < 1e-12);
        let jordan = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap();
        let e = dense_eigenvalues(&jordan).unwrap();
        assert!(spectrum_distance(&e, &[c64(0.0, 1.0), c64(0.0, -1.0)]) < 1e-14);
    }
}
