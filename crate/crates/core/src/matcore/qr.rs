use num_complex::Complex64;

use super::ComplexMatrix;

/// Householder QR: `M = Q R` with `Q` unitary (`m × m`) and `R` upper
/// trapezoidal (`m × n`). Never fails for finite input.
pub fn qr(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let (rows, cols) = m.shape();
    let mut r = m.clone();
    let mut q = ComplexMatrix::identity(rows);
    for k in 0..cols.min(rows.saturating_sub(1)) {
        let norm: f64 = (k..rows).map(|i| r[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = r[(k, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k..rows).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;
        // R ← (I − τ v v^H) R
        for j in k..cols {
            let dot: Complex64 = v.iter().enumerate().map(|(t, vi)| vi.conj() * r[(k + t, j)]).sum();
            let f = dot * tau;
            for (t, vi) in v.iter().enumerate() {
                r[(k + t, j)] -= vi * f;
            }
        }
        for i in k + 1..rows {
            r[(i, k)] = Complex64::new(0.0, 0.0);
        }
        // Q ← Q (I − τ v v^H)
        for i in 0..rows {
            let dot: Complex64 = v.iter().enumerate().map(|(t, vi)| q[(i, k + t)] * vi).sum();
            let f = dot * tau;
            for (t, vi) in v.iter().enumerate() {
                q[(i, k + t)] -= f * vi.conj();
            }
        }
    }
    (q, r)
}
