//! Dense linear algebra on row-major `Vec<f64>` buffers: LU determinants,
//! a cyclic Jacobi eigensolver for symmetric matrices, and small helpers.
//!
//! Matrix orders stay at or below a couple thousand throughout the crate, so
//! dense O(n^3) routines are the simplest adequate tool.

use crate::error::{Error, Result};

/// det(I - M) by LU with partial pivoting, done in place on a copy.
pub fn det_identity_minus(m: &[f64], n: usize) -> f64 {
    debug_assert_eq!(m.len(), n * n);
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = if i == j { 1.0 - m[i * n + j] } else { -m[i * n + j] };
        }
    }
    let mut det = 1.0;
    for k in 0..n {
        // pivot search in column k
        let mut p = k;
        let mut best = a[k * n + k].abs();
        for r in (k + 1)..n {
            let v = a[r * n + k].abs();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let piv = a[k * n + k];
        det *= piv;
        for r in (k + 1)..n {
            let f = a[r * n + k] / piv;
            if f != 0.0 {
                for j in (k + 1)..n {
                    a[r * n + j] -= f * a[k * n + j];
                }
            }
        }
    }
    det
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps run until the off-diagonal Frobenius norm drops below
/// `1e-12 * (1 + ||M||_F)`. Diagonal input returns its diagonal unchanged.
pub fn jacobi_eigenvalues(m: &[f64], n: usize) -> Result<Vec<f64>> {
    debug_assert_eq!(m.len(), n * n);
    let mut a = m.to_vec();
    let norm: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let thresh = 1e-12 * (1.0 + norm);
    for _sweep in 0..60 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * a[i * n + j] * a[i * n + j];
            }
        }
        if off.sqrt() <= thresh {
            return Ok((0..n).map(|i| a[i * n + i]).collect());
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                // smaller-angle root, standard for stability
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(Error::Convergence(
        "Jacobi eigensolver exceeded the sweep limit".into(),
    ))
}

/// C = A * B for square row-major matrices of order n.
pub fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            let row = &b[k * n..(k + 1) * n];
            let out = &mut c[i * n..(i + 1) * n];
            for j in 0..n {
                out[j] += aik * row[j];
            }
        }
    }
    c
}

pub fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}
