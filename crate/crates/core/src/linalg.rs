//! Small dense kernels shared by the fitting and simulation code.
//!
//! Matrices are plain slices: column-major for tall designs, row-major for
//! the small symmetric systems.

use alloc::vec;
use alloc::vec::Vec;

/// Relative threshold on `|R_jj|` (Householder QR) below which a design is
/// treated as singular.
pub(crate) const QR_RANK_TOL: f64 = 1e-10;

/// Relative threshold on a Cholesky pivot of a cross-product matrix, measured
/// against the untouched diagonal entry of the same variable.
pub(crate) const GRAM_PIVOT_TOL: f64 = 1e-10;

/// Least squares through Householder QR.
///
/// `design` is `n x k` column-major. Returns `None` when some `|R_jj|` falls
/// below `QR_RANK_TOL * max |R_ii|`.
pub(crate) fn qr_least_squares(design: &[f64], n: usize, k: usize, y: &[f64]) -> Option<Vec<f64>> {
    debug_assert_eq!(design.len(), n * k);
    debug_assert!(k <= n);
    let mut a = design.to_vec();
    let mut qty = y.to_vec();
    let mut r_diag = vec![0.0; k];

    for j in 0..k {
        let col = j * n;
        let norm = libm::sqrt(a[col + j..col + n].iter().map(|v| v * v).sum::<f64>());
        if norm == 0.0 {
            r_diag[j] = 0.0;
            continue;
        }
        let alpha = if a[col + j] > 0.0 { -norm } else { norm };
        a[col + j] -= alpha;
        let vnorm2: f64 = a[col + j..col + n].iter().map(|v| v * v).sum();
        r_diag[j] = alpha;
        if vnorm2 == 0.0 {
            continue;
        }
        for c in j + 1..k {
            let other = c * n;
            let dot: f64 = (j..n).map(|i| a[col + i] * a[other + i]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in j..n {
                a[other + i] -= f * a[col + i];
            }
        }
        let dot: f64 = (j..n).map(|i| a[col + i] * qty[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in j..n {
            qty[i] -= f * a[col + i];
        }
    }

    let largest = r_diag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if largest == 0.0 || r_diag.iter().any(|v| v.abs() < QR_RANK_TOL * largest) {
        return None;
    }

    // back substitution on R (upper triangle of `a`, diagonal in r_diag)
    let mut beta = vec![0.0; k];
    for j in (0..k).rev() {
        let mut s = qty[j];
        for c in j + 1..k {
            s -= a[c * n + j] * beta[c];
        }
        beta[j] = s / r_diag[j];
    }
    Some(beta)
}

/// In-place lower Cholesky factor of a row-major `k x k` symmetric matrix.
///
/// Pivot `j` is rejected when it is not above `tol * reference[j]`. On
/// success the strict upper triangle is left untouched and should be ignored.
pub(crate) fn cholesky_in_place(a: &mut [f64], k: usize, reference: &[f64], tol: f64) -> bool {
    for j in 0..k {
        let mut d = a[j * k + j];
        for t in 0..j {
            d -= a[j * k + t] * a[j * k + t];
        }
        if !(d > tol * reference[j]) || !d.is_finite() {
            return false;
        }
        let l = libm::sqrt(d);
        a[j * k + j] = l;
        for i in j + 1..k {
            let mut s = a[i * k + j];
            for t in 0..j {
                s -= a[i * k + t] * a[j * k + t];
            }
            a[i * k + j] = s / l;
        }
    }
    true
}

/// Solves `L x = b` in place for a lower factor stored row-major.
pub(crate) fn forward_substitute(l: &[f64], k: usize, b: &mut [f64]) {
    for i in 0..k {
        let mut s = b[i];
        for t in 0..i {
            s -= l[i * k + t] * b[t];
        }
        b[i] = s / l[i * k + i];
    }
}

/// Solves `L^T x = b` in place.
pub(crate) fn backward_substitute_transposed(l: &[f64], k: usize, b: &mut [f64]) {
    for i in (0..k).rev() {
        let mut s = b[i];
        for t in i + 1..k {
            s -= l[t * k + i] * b[t];
        }
        b[i] = s / l[i * k + i];
    }
}

/// Inverse of an SPD matrix from its lower Cholesky factor, row-major.
pub(crate) fn inverse_from_cholesky(l: &[f64], k: usize) -> Vec<f64> {
    let mut inv = vec![0.0; k * k];
    let mut e = vec![0.0; k];
    for c in 0..k {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[c] = 1.0;
        forward_substitute(l, k, &mut e);
        backward_substitute_transposed(l, k, &mut e);
        for r in 0..k {
            inv[r * k + c] = e[r];
        }
    }
    // symmetrize against rounding
    for r in 0..k {
        for c in r + 1..k {
            let m = 0.5 * (inv[r * k + c] + inv[c * k + r]);
            inv[r * k + c] = m;
            inv[c * k + r] = m;
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_recovers_exact_line() {
        // columns: intercept, x
        let design = [1.0, 1.0, 1.0, 0.0, 1.0, 2.0];
        let beta = qr_least_squares(&design, 3, 2, &[1.0, 3.0, 5.0]).unwrap();
        assert!((beta[0] - 1.0).abs() < 1e-12);
        assert!((beta[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn qr_flags_duplicate_column() {
        let design = [1.0, 1.0, 1.0, 0.0, 1.0, 5.0, 0.0, 1.0, 5.0];
        assert!(qr_least_squares(&design, 3, 3, &[1.0, 2.0, 3.0]).is_none());
    }

    #[test]
    fn cholesky_inverse_roundtrip() {
        let a = [4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let mut l = a;
        assert!(cholesky_in_place(&mut l, 3, &[4.0, 5.0, 3.0], 1e-12));
        let inv = inverse_from_cholesky(&l, 3);
        for r in 0..3 {
            for c in 0..3 {
                let v: f64 = (0..3).map(|t| a[r * 3 + t] * inv[t * 3 + c]).sum();
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cholesky_rejects_singular() {
        let mut a = [1.0, 1.0, 1.0, 1.0];
        assert!(!cholesky_in_place(&mut a, 2, &[1.0, 1.0], 1e-10));
    }
}
