//! Block Lanczos reduction of a Hermitian matrix to block tridiagonal form.
//!
//! Starting from an orthonormal basis of `range(Z)`, each step multiplies the
//! newest block by `H`, orthogonalises the result against every column
//! computed so far (two Gram-Schmidt passes), and takes the numerically
//! nonzero part of its range as the next block. The block width can only
//! shrink within a run. A rank-zero candidate means the Krylov space is
//! invariant: the event is logged and the run restarts from a single vector
//! orthogonal to everything computed, so the resulting `T` is block diagonal
//! across the boundary.
//!
//! Rank decisions on the candidate blocks are taken against `tol · ‖H‖_F`,
//! since the candidates inherit the scale of `H`; only the starting block is
//! ranked relative to its own largest singular value.

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::matcore::{
    antihermitian_part, hermitian_part, orthonormal_range, orthonormal_range_abs, project_out,
    subspace_inclusion_residual, svd, ComplexMatrix,
};

/// Relative Hermitian defect accepted for the input of [`block_lanczos`].
pub const HERMITIAN_INPUT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BreakdownEvent {
    /// Number of blocks built in the current run when the candidate block vanished.
    pub step: usize,
    /// Columns of `U` completed at that moment.
    pub columns_completed: usize,
}

#[derive(Clone, Debug)]
pub struct BlockTridiagonalization {
    /// Unitary `U`.
    pub basis: ComplexMatrix,
    /// `T = U^H H U`, assembled from the recurrence.
    pub trid: ComplexMatrix,
    pub block_sizes: Vec<usize>,
    pub breakdown_events: Vec<BreakdownEvent>,
    pub restarted: bool,
}

impl BlockTridiagonalization {
    pub fn n(&self) -> usize {
        self.basis.rows()
    }

    /// Starting column of every block.
    pub fn block_offsets(&self) -> Vec<usize> {
        offsets(&self.block_sizes)
    }

    /// Block indices at which a restarted run begins.
    pub fn run_starts(&self) -> Vec<usize> {
        let offs = self.block_offsets();
        self.breakdown_events
            .iter()
            .filter_map(|ev| offs.iter().position(|&o| o == ev.columns_completed))
            .collect()
    }

    /// `‖U^H U − I‖_F`.
    pub fn unitarity_residual(&self) -> f64 {
        self.basis.orthonormality_defect()
    }

    /// `‖U^H H U − T‖_F`.
    pub fn similarity_residual(&self, h: &ComplexMatrix) -> f64 {
        (&self.project(h) - &self.trid).frobenius_norm()
    }

    /// `U^H M U`.
    pub fn project(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.basis.adjoint_mul(&(m * &self.basis))
    }

    /// Frobenius norm of the blocks of `M` that couple different Lanczos runs.
    /// Zero when `M` is block diagonal across every breakdown boundary.
    pub fn cross_run_coupling(&self, m: &ComplexMatrix) -> f64 {
        let offs = self.block_offsets();
        let n = self.n();
        let mut run_of_col = vec![0usize; n];
        let starts = self.run_starts();
        let mut run = 0;
        for (b, (&off, &size)) in offs.iter().zip(&self.block_sizes).enumerate() {
            if b > 0 && starts.contains(&b) {
                run += 1;
            }
            run_of_col[off..off + size].fill(run);
        }
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if run_of_col[i] != run_of_col[j] {
                    acc += m[(i, j)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }
}

pub(crate) fn offsets(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .scan(0usize, |acc, &s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect()
}

/// Reduces Hermitian `h` to block tridiagonal form starting from `range(z)`.
pub fn block_lanczos(h: &ComplexMatrix, z: &ComplexMatrix, tol: f64) -> Result<BlockTridiagonalization> {
    if !h.is_square() {
        return Err(dim_err("block_lanczos", "H must be square"));
    }
    let n = h.rows();
    if z.rows() != n {
        return Err(dim_err(
            "block_lanczos",
            format!("Z has {} rows, H is {n}x{n}", z.rows()),
        ));
    }
    if z.cols() == 0 || z.cols() > n {
        return Err(dim_err(
            "block_lanczos",
            format!("Z must have 1..={n} columns, has {}", z.cols()),
        ));
    }
    let hnorm = h.frobenius_norm();
    if h.hermitian_defect() > HERMITIAN_INPUT_TOL * hnorm.max(f64::MIN_POSITIVE) {
        return Err(Error::Contract(format!(
            "block_lanczos needs a Hermitian matrix (defect {:.3e})",
            h.hermitian_defect()
        )));
    }
    if z.frobenius_norm() == 0.0 {
        return Err(Error::Argument("starting block Z is zero".into()));
    }
    let threshold = tol * hnorm;

    let mut u = ComplexMatrix::zeros(n, n);
    let mut t = ComplexMatrix::zeros(n, n);
    let mut block_sizes = Vec::new();
    let mut breakdown_events = Vec::new();

    let (q0, s0) = orthonormal_range(z, tol)?;
    u.set_block(0, 0, &q0);
    let mut offset = 0;
    let mut width = s0;
    let mut filled = s0;
    let mut run_step = 1;
    block_sizes.push(s0);

    while filled < n {
        let ub = u.columns(offset..offset + width);
        let mut w = h * &ub;
        t.set_block(offset, offset, &symmetrize(&ub.adjoint_mul(&w)));

        let computed = u.columns(0..filled);
        w = project_out(&w, &computed);
        w = project_out(&w, &computed);

        let dec = svd(&w, tol)?;
        let s_new = dec.rank_above(threshold).min(n - filled).min(width);
        if s_new == 0 {
            breakdown_events.push(BreakdownEvent {
                step: run_step,
                columns_completed: filled,
            });
            let r = restart_vector(&computed);
            u.set_block(0, filled, &r);
            offset = filled;
            width = 1;
            filled += 1;
            run_step = 1;
            block_sizes.push(1);
            continue;
        }

        let q = dec.left_vectors.columns(0..s_new);
        // Re-orthogonalise the kept directions; they are already orthogonal
        // to `computed` up to rounding.
        let q = {
            let q = project_out(&q, &computed);
            orthonormal_range_abs(&q, 0.5)?.0
        };
        let coupling = q.adjoint_mul(&w);
        u.set_block(0, filled, &q);
        t.set_block(filled, offset, &coupling);
        t.set_block(offset, filled, &coupling.adjoint());
        offset = filled;
        filled += s_new;
        width = s_new;
        run_step += 1;
        block_sizes.push(s_new);
    }

    let ub = u.columns(offset..offset + width);
    let last = ub.adjoint_mul(&(h * &ub));
    t.set_block(offset, offset, &symmetrize(&last));

    let restarted = !breakdown_events.is_empty();
    Ok(BlockTridiagonalization {
        basis: u,
        trid: t,
        block_sizes,
        breakdown_events,
        restarted,
    })
}

fn symmetrize(x: &ComplexMatrix) -> ComplexMatrix {
    hermitian_part(x).expect("diagonal blocks are square")
}

/// Canonical vector with the largest component outside `range(computed)`,
/// orthogonalised and normalised (lowest index wins ties).
fn restart_vector(computed: &ComplexMatrix) -> ComplexMatrix {
    let n = computed.rows();
    let mut best: Option<(f64, ComplexMatrix)> = None;
    for i in 0..n {
        let e = ComplexMatrix::unit_vector(n, i);
        let r = project_out(&project_out(&e, computed), computed);
        let norm = r.frobenius_norm();
        if best.as_ref().is_none_or(|(b, _)| norm > *b + 1e-12) {
            best = Some((norm, r));
        }
    }
    let (norm, r) = best.expect("n >= 1");
    r.scale_real(1.0 / norm)
}

/// Orthonormal basis of `K_j(M, Z) = range([Z, MZ, …, M^j Z])`.
///
/// Built incrementally: only the directions added at the previous step are
/// multiplied by `M`, then orthogonalised twice against the basis. New
/// directions are kept when their singular values exceed `tol · ‖M‖_F`.
pub fn krylov_basis(m: &ComplexMatrix, z: &ComplexMatrix, j: usize, tol: f64) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(dim_err("krylov_basis", "M must be square"));
    }
    if z.rows() != m.rows() {
        return Err(dim_err(
            "krylov_basis",
            format!("Z has {} rows, M is {}x{}", z.rows(), m.rows(), m.cols()),
        ));
    }
    let n = m.rows();
    let (mut basis, _) = orthonormal_range(z, tol)?;
    let mut newest = basis.clone();
    let threshold = tol * m.frobenius_norm();
    for _ in 0..j {
        if newest.cols() == 0 || basis.cols() >= n {
            break;
        }
        let mut w = m * &newest;
        w = project_out(&w, &basis);
        w = project_out(&w, &basis);
        let (q, s) = orthonormal_range_abs(&w, threshold)?;
        if s == 0 {
            break;
        }
        let q = orthonormal_range_abs(&project_out(&q, &basis), 0.5)?.0;
        basis = ComplexMatrix::hcat(&[&basis, &q])?;
        newest = q;
    }
    Ok(basis)
}

/// For `j = 0..=j_max`, the residual of `K_j(A_AH, Z)` against `K_j(A_H, Z)`.
pub fn krylov_inclusion_check(a: &ComplexMatrix, z: &ComplexMatrix, j_max: usize, tol: f64) -> Result<Vec<f64>> {
    let ah = hermitian_part(a)?;
    let aah = antihermitian_part(a)?;
    (0..=j_max)
        .map(|j| {
            let x = krylov_basis(&aah, z, j, tol)?;
            let y = krylov_basis(&ah, z, j, tol)?;
            subspace_inclusion_residual(&x, &y)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{c64, DEFAULT_RANK_TOL};

    #[test]
    fn diagonal_with_full_start_is_identity_reduction() {
        let h = ComplexMatrix::from_diagonal(&[c64(1.0, 0.0), c64(2.0, 0.0), c64(3.0, 0.0)]);
        let red = block_lanczos(&h, &ComplexMatrix::identity(3), DEFAULT_RANK_TOL).unwrap();
        assert_eq!(red.block_sizes, vec![3]);
        assert!(!red.restarted);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((red.basis[(i, j)].norm() - expect).abs() < 1e-14);
            }
        }
        assert!((&red.trid - &h).frobenius_norm() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        let mut h = ComplexMatrix::identity(3);
        h[(0, 1)] = c64(1.0, 0.0);
        let z = ComplexMatrix::unit_vector(3, 0);
        assert!(matches!(block_lanczos(&h, &z, 1e-10), Err(Error::Contract(_))));
        let h = ComplexMatrix::identity(3);
        assert!(matches!(
            block_lanczos(&h, &ComplexMatrix::zeros(3, 1), 1e-10),
            Err(Error::Argument(_))
        ));
        assert!(block_lanczos(&h, &ComplexMatrix::zeros(2, 1), 1e-10).is_err());
    }

    #[test]
    fn identity_breaks_down_every_step() {
        let h = ComplexMatrix::identity(4);
        let red = block_lanczos(&h, &ComplexMatrix::unit_vector(4, 2), 1e-10).unwrap();
        assert_eq!(red.block_sizes, vec![1, 1, 1, 1]);
        assert_eq!(red.breakdown_events.len(), 3);
        assert!(red.unitarity_residual() < 1e-14);
        assert!(red.cross_run_coupling(&red.trid) == 0.0);
    }

    #[test]
    fn krylov_of_shift_matrix_fills_space() {
        let shift = ComplexMatrix::from_fn(4, 4, |i, j| if i == j + 1 { c64(1.0, 0.0) } else { c64(0.0, 0.0) });
        let e1 = ComplexMatrix::unit_vector(4, 0);
        let k3 = krylov_basis(&shift, &e1, 3, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(k3.cols(), 4);
        // the explicit powers e1..e4 lie in the basis
        assert!(subspace_inclusion_residual(&ComplexMatrix::identity(4), &k3).unwrap() < 1e-14);
        assert_eq!(krylov_basis(&shift, &e1, 1, DEFAULT_RANK_TOL).unwrap().cols(), 2);
    }

    #[test]
    fn krylov_stagnates_for_identity() {
        let z = ComplexMatrix::from_fn(5, 2, |i, j| c64(i as f64 + 1.0, j as f64));
        let k0 = krylov_basis(&ComplexMatrix::identity(5), &z, 0, DEFAULT_RANK_TOL).unwrap();
        let k4 = krylov_basis(&ComplexMatrix::identity(5), &z, 4, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(k0.cols(), 2);
        assert_eq!(k4.cols(), 2);
        let direct = orthonormal_range(&z, DEFAULT_RANK_TOL).unwrap().0;
        assert!(subspace_inclusion_residual(&k0, &direct).unwrap() < 1e-14);
    }

    #[test]
    fn hermitian_matrix_has_trivial_inclusion() {
        let h = ComplexMatrix::from_fn(6, 6, |i, j| {
            let x = ((i * 7 + j * 3) % 5) as f64;
            let y = ((i * 7 + j * 3) % 5) as f64;
            let (a, b) = if i <= j {
                (x + y, (i as f64 - j as f64))
            } else {
                (0.0, 0.0)
            };
            c64(a, b)
        });
        let h = hermitian_part(&(&h + &h.adjoint())).unwrap();
        let z = ComplexMatrix::from_fn(6, 2, |i, j| c64((i + j) as f64, 1.0));
        let res = krylov_inclusion_check(&h, &z, 4, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(res.len(), 5);
        assert!(res.iter().all(|&r| r <= 1e-13));
    }
}
