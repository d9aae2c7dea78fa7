//! Gauss-Legendre rules and adaptive quadrature.
//!
//! Rules of arbitrary order are generated at runtime by Newton iteration on
//! the Legendre recurrence, so no node tables are embedded. The adaptive
//! integrator drives an embedded 12/24-point Gauss pair with interval
//! bisection, which handles the mildly singular integrands produced by the
//! square-root substitutions used elsewhere in the crate.

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Newton iteration with the Chebyshev-like initial guess
/// cos(pi (i - 1/4)/(n + 1/2)); converges to machine precision in a handful
/// of steps for the orders used here (up to a few thousand).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P_n'(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                // one polishing step after convergence
                let mut q0 = 1.0;
                let mut q1 = x;
                for k in 2..=n {
                    let kf = k as f64;
                    let q2 = ((2.0 * kf - 1.0) * x * q1 - (kf - 1.0) * q0) / kf;
                    q0 = q1;
                    q1 = q2;
                }
                dp = n as f64 * (x * q1 - q0) / (x * x - 1.0);
                x -= q1 / dp;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Nodes and weights mapped affinely to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    (
        x.iter().map(|&t| c + h * t).collect(),
        w.iter().map(|&t| h * t).collect(),
    )
}

fn fixed_gauss(f: &dyn Fn(f64) -> f64, a: f64, b: f64, nodes: &[f64], weights: &[f64]) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (&x, &w) in nodes.iter().zip(weights) {
        acc += w * f(c + h * x);
    }
    acc * h
}

/// Adaptive quadrature of `f` over [a, b] to absolute tolerance `tol`.
///
/// Error per interval is estimated from the embedded 12/24-point Gauss pair;
/// intervals whose estimate exceeds their share of the tolerance are bisected.
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain("adaptive: endpoints must be finite".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    let (n12, w12) = gauss_legendre(12);
    let (n24, w24) = gauss_legendre(24);
    let mut total = 0.0;
    // stack of (a, b, tol_share)
    let mut stack = vec![(a, b, tol.max(1e-300))];
    let mut work = 0usize;
    while let Some((lo, hi, t)) = stack.pop() {
        work += 1;
        if work > 200_000 {
            return Err(Error::Convergence(format!(
                "adaptive quadrature did not converge on [{a}, {b}] at tol {tol:e}"
            )));
        }
        let coarse = fixed_gauss(f, lo, hi, &n12, &w12);
        let fine = fixed_gauss(f, lo, hi, &n24, &w24);
        let err = (fine - coarse).abs();
        if err <= t || (hi - lo) < 1e-14 * (b - a).abs() {
            total += fine;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * t));
            stack.push((mid, hi, 0.5 * t));
        }
    }
    Ok(total)
}

/// Adaptive quadrature of `f` over [a, +inf) for integrands with at least
/// exponential decay. Panels of width `panel` are accumulated until two
/// consecutive panels contribute less than `tol`; a hard cap guards against
/// divergent integrands.
pub fn adaptive_to_inf(f: &dyn Fn(f64) -> f64, a: f64, panel: f64, tol: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut lo = a;
    let mut quiet = 0u32;
    let cap = a + 1.0e4;
    while quiet < 2 {
        let hi = lo + panel;
        if hi > cap {
            return Err(Error::Convergence(
                "semi-infinite quadrature: integrand did not decay within the cap".into(),
            ));
        }
        let part = adaptive(f, lo, hi, tol * 0.25)?;
        total += part;
        if part.abs() < tol * 0.25 {
            quiet += 1;
        } else {
            quiet = 0;
        }
        lo = hi;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_rule_integrates_polynomials_exactly() {
        // degree 2n-1 exactness
        for n in [2usize, 5, 12, 40] {
            let (x, w) = gauss_legendre(n);
            let sum: f64 = w.iter().sum();
            assert!((sum - 2.0).abs() < 1e-13, "weight sum for n={n}: {sum}");
            let deg = 2 * n - 1;
            let val: f64 = x.iter().zip(&w).map(|(&t, &ww)| ww * t.powi(deg as i32)).sum();
            assert!(val.abs() < 1e-12, "odd power must vanish: n={n}");
            let even = 2 * n - 2;
            let val: f64 = x.iter().zip(&w).map(|(&t, &ww)| ww * t.powi(even as i32)).sum();
            let exact = 2.0 / (even as f64 + 1.0);
            assert!((val - exact).abs() < 1e-12, "n={n} even moment {val} vs {exact}");
        }
    }

    #[test]
    fn gl_large_order_nodes_sorted_and_symmetric() {
        let (x, w) = gauss_legendre(257);
        for i in 1..x.len() {
            assert!(x[i] > x[i - 1]);
        }
        for i in 0..x.len() {
            assert!((x[i] + x[x.len() - 1 - i]).abs() < 1e-14);
            assert!(w[i] > 0.0);
        }
    }

    #[test]
    fn adaptive_handles_smooth_and_singular_integrands() {
        let v = adaptive(&|x: f64| x.exp(), 0.0, 1.0, 1e-13).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-12);
        // sqrt endpoint singularity
        let v = adaptive(&|x: f64| x.sqrt(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-10, "got {v}");
    }

    #[test]
    fn semi_infinite_gamma_integral() {
        // int_0^inf u e^-u du = 1
        let v = adaptive_to_inf(&|u: f64| u * (-u).exp(), 0.0, 5.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-10, "got {v}");
    }
}
