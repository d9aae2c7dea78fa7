//! Integral operators on L^2([s, inf)): Nystrom discretization on a
//! truncated Gauss-Legendre grid, Fredholm determinants, trace and
//! Hilbert-Schmidt norms, and the determinant-difference bounds.
//!
//! Kernels are discretized with the symmetric sqrt(w) scaling
//! M_ij = sqrt(w_i) K(x_i, x_j) sqrt(w_j), so operator composition is plain
//! matrix multiplication and symmetry survives exactly. Truncation length T
//! comes from probing each kernel's decay; all kernels in this crate decay
//! at least exponentially.

use crate::error::{Error, Result};
use crate::linalg::{det_identity_minus, frobenius, jacobi_eigenvalues, mat_mul};
use crate::quad::{adaptive_to_inf, gauss_legendre_on};
use crate::specfun::{airy_ai, airy_ai_prime};
use std::sync::Arc;

/// One-variable profile K(u) standing for the two-variable kernel
/// K(x + y - s) on [s, inf)^2.
#[derive(Clone)]
pub struct ShiftKernel {
    pub name: String,
    /// Smallest admissible argument; evaluation below it is a domain error.
    pub min_arg: f64,
    profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl ShiftKernel {
    pub fn new(name: impl Into<String>, profile: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ShiftKernel { name: name.into(), min_arg: f64::NEG_INFINITY, profile: Arc::new(profile) }
    }

    pub fn with_min_arg(
        name: impl Into<String>,
        min_arg: f64,
        profile: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ShiftKernel { name: name.into(), min_arg, profile: Arc::new(profile) }
    }

    /// The Airy profile Ai(u)/sqrt(2) of the limiting operator.
    pub fn airy() -> Self {
        ShiftKernel::new("airy", |u| airy_ai(u) / std::f64::consts::SQRT_2)
    }

    /// Evaluate without the domain guard; callers must keep u above min_arg.
    pub fn eval_unchecked(&self, u: f64) -> f64 {
        (self.profile)(u)
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        if u <= self.min_arg {
            return Err(Error::Range(format!(
                "kernel '{}' evaluated at {u} <= left endpoint {}",
                self.name, self.min_arg
            )));
        }
        Ok((self.profile)(u))
    }
}

impl std::fmt::Debug for ShiftKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ShiftKernel")
            .field("name", &self.name)
            .field("min_arg", &self.min_arg)
            .finish()
    }
}

/// Gauss-Legendre grid on [s, s + T].
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub s: f64,
    pub m: usize,
    pub truncation: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    fn compatible(&self, other: &QuadratureGrid) -> bool {
        self.s == other.s && self.m == other.m && self.truncation == other.truncation
    }
}

const DECAY_RATIO: f64 = 1e-16;
const T_CAP: f64 = 1e4;
const T_MIN: f64 = 10.0;

/// Picks the truncation length so that every kernel has decayed to 1e-16 of
/// its peak at s + T, then lays an m-point Gauss-Legendre rule on [s, s + T].
pub fn build_grid(s: f64, m: usize, kernels: &[&ShiftKernel]) -> Result<QuadratureGrid> {
    if m < 8 {
        return Err(Error::Config(format!("grid size m = {m} must be >= 8")));
    }
    let mut t = T_MIN;
    for k in kernels {
        let mut peak = 0.0f64;
        let mut run_below = 0u32;
        let mut u = s;
        let step = 0.5;
        let t_k;
        loop {
            let v = k.eval(u)?.abs();
            peak = peak.max(v);
            if peak > 0.0 && v <= DECAY_RATIO * peak {
                run_below += 1;
                if run_below >= 8 {
                    t_k = (u - s).max(T_MIN);
                    break;
                }
            } else {
                run_below = 0;
            }
            u += step;
            if u - s > T_CAP {
                if peak == 0.0 {
                    t_k = T_MIN; // identically zero kernel: any truncation works
                    break;
                }
                return Err(Error::Convergence(format!(
                    "kernel '{}' did not decay within T = {T_CAP}",
                    k.name
                )));
            }
        }
        t = t.max(t_k);
    }
    let (nodes, weights) = gauss_legendre_on(m, s, s + t);
    Ok(QuadratureGrid { s, m, truncation: t, nodes, weights })
}

/// Weight-scaled symmetric matrix approximating an integral operator.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    pub grid: QuadratureGrid,
    matrix: Vec<f64>,
}

impl DiscretizedOperator {
    /// Wraps an explicit weight-scaled matrix; the caller asserts symmetry.
    pub fn from_parts(grid: QuadratureGrid, matrix: Vec<f64>) -> Self {
        debug_assert_eq!(matrix.len(), grid.m * grid.m);
        DiscretizedOperator { grid, matrix }
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }
}

/// Discretize a shift kernel: M_ij = sqrt(w_i) K(x_i + x_j - s) sqrt(w_j).
pub fn discretize(kernel: &ShiftKernel, grid: &QuadratureGrid) -> Result<DiscretizedOperator> {
    let m = grid.m;
    let sw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let mut mat = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let v = kernel.eval(grid.nodes[i] + grid.nodes[j] - grid.s)? * sw[i] * sw[j];
            mat[i * m + j] = v;
            mat[j * m + i] = v;
        }
    }
    Ok(DiscretizedOperator { grid: grid.clone(), matrix: mat })
}

/// Discretize a general symmetric two-variable kernel on the same grid.
pub fn discretize_symmetric(
    kernel: impl Fn(f64, f64) -> Result<f64>,
    grid: &QuadratureGrid,
) -> Result<DiscretizedOperator> {
    let m = grid.m;
    let sw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let mut mat = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let v = kernel(grid.nodes[i], grid.nodes[j])? * sw[i] * sw[j];
            mat[i * m + j] = v;
            mat[j * m + i] = v;
        }
    }
    Ok(DiscretizedOperator { grid: grid.clone(), matrix: mat })
}

/// S = H G + G H at the matrix level; symmetric because H G = (G H)^T for
/// symmetric factors.
pub fn compose_product_sum(
    g: &DiscretizedOperator,
    h: &DiscretizedOperator,
) -> Result<DiscretizedOperator> {
    if !g.grid.compatible(&h.grid) {
        return Err(Error::Config("compose: operators live on different grids".into()));
    }
    let m = g.grid.m;
    let hg = mat_mul(&h.matrix, &g.matrix, m);
    let mut s = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            s[i * m + j] = hg[i * m + j] + hg[j * m + i];
        }
    }
    Ok(DiscretizedOperator { grid: g.grid.clone(), matrix: s })
}

/// Fredholm determinant det(I - M) of the discretized operator.
pub fn fredholm_det(op: &DiscretizedOperator) -> f64 {
    det_identity_minus(&op.matrix, op.grid.m)
}

pub const DEFAULT_GRID_M: usize = 128;
pub const MAX_GRID_M: usize = 2048;

/// Doubles the grid size until two successive determinants agree to `tol`.
/// Returns the finer value and the grid size it was computed on.
pub fn det_with_refinement(
    mut build_det: impl FnMut(usize) -> Result<f64>,
    m0: usize,
    tol: f64,
) -> Result<(f64, usize)> {
    let mut m = m0.max(8);
    let mut prev = build_det(m)?;
    while m <= MAX_GRID_M / 2 {
        let m2 = m * 2;
        let cur = build_det(m2)?;
        if (cur - prev).abs() < tol {
            return Ok((cur, m2));
        }
        prev = cur;
        m = m2;
    }
    Err(Error::Convergence(format!(
        "determinant did not stabilize to {tol:e} by m = {MAX_GRID_M} (last value {prev})"
    )))
}

/// Hilbert-Schmidt norm of a shift-kernel operator on [s, inf), via the exact
/// one-dimensional reduction ||A||_2^2 = int_s^inf (u - s) K(u)^2 du.
pub fn hs_norm_shift(kernel: &ShiftKernel, s: f64) -> Result<f64> {
    let f = |u: f64| {
        let v = (kernel.profile)(u);
        (u - s) * v * v
    };
    if s <= kernel.min_arg {
        return Err(Error::Range(format!(
            "hs_norm_shift: s = {s} at or below kernel '{}' domain",
            kernel.name
        )));
    }
    let val = adaptive_to_inf(&f, s, 5.0, 1e-14)?;
    if !val.is_finite() {
        return Err(Error::Convergence("hs_norm_shift: divergent integral".into()));
    }
    Ok(val.max(0.0).sqrt())
}

/// Trace norm (sum of |eigenvalues|) of the symmetric discretized operator.
pub fn trace_norm(op: &DiscretizedOperator) -> Result<f64> {
    trace_norm_matrix(&op.matrix, op.grid.m)
}

pub fn trace_norm_matrix(matrix: &[f64], n: usize) -> Result<f64> {
    Ok(jacobi_eigenvalues(matrix, n)?.iter().map(|l| l.abs()).sum())
}

/// Closed form of the Airy operator's trace norm on [s, inf):
/// (-Ai(s)Ai'(s) - 2s Ai'(s)^2 + 2s^2 Ai(s)^2) / 3.
pub fn airy_trace_norm_closed(s: f64) -> f64 {
    let ai = airy_ai(s);
    let aip = airy_ai_prime(s);
    (-ai * aip - 2.0 * s * aip * aip + 2.0 * s * s * ai * ai) / 3.0
}

/// ||A - B||_1 exp(||A||_1 + ||B||_1 + 1), an upper bound for
/// |det(I - A) - det(I - B)|.
pub fn seiler_simon_bound(a: &DiscretizedOperator, b: &DiscretizedOperator) -> Result<f64> {
    if !a.grid.compatible(&b.grid) {
        return Err(Error::Config("seiler_simon_bound: grid mismatch".into()));
    }
    let m = a.grid.m;
    let diff: Vec<f64> = a.matrix.iter().zip(&b.matrix).map(|(x, y)| x - y).collect();
    let d1 = trace_norm_matrix(&diff, m)?;
    let a1 = trace_norm(a)?;
    let b1 = trace_norm(b)?;
    Ok(d1 * (a1 + b1 + 1.0).exp())
}

/// Both sides of the product-sum trace-norm bound:
/// lhs = 2 ||S - Sbar||_1 with S = H G + G H and Sbar = 2 G^2;
/// rhs = ||G + H - 2Gbar||_2 ||G + H + 2Gbar||_2 + ||G - H||_2^2.
pub fn lemma2_bound(
    g_t: &DiscretizedOperator,
    h_t: &DiscretizedOperator,
    g: &DiscretizedOperator,
) -> Result<(f64, f64)> {
    if !g_t.grid.compatible(&h_t.grid) || !g_t.grid.compatible(&g.grid) {
        return Err(Error::Config("lemma2_bound: grid mismatch".into()));
    }
    let m = g.grid.m;
    let s_tau = compose_product_sum(g_t, h_t)?;
    let s_bar = compose_product_sum(g, g)?;
    let diff: Vec<f64> = s_tau.matrix.iter().zip(&s_bar.matrix).map(|(x, y)| x - y).collect();
    let lhs = 2.0 * trace_norm_matrix(&diff, m)?;
    let sum_minus: Vec<f64> = (0..m * m)
        .map(|i| g_t.matrix[i] + h_t.matrix[i] - 2.0 * g.matrix[i])
        .collect();
    let sum_plus: Vec<f64> = (0..m * m)
        .map(|i| g_t.matrix[i] + h_t.matrix[i] + 2.0 * g.matrix[i])
        .collect();
    let gh: Vec<f64> = (0..m * m).map(|i| g_t.matrix[i] - h_t.matrix[i]).collect();
    let rhs = frobenius(&sum_minus) * frobenius(&sum_plus) + frobenius(&gh).powi(2);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_to_inf;

    fn airy_grid(s: f64, m: usize) -> QuadratureGrid {
        let k = ShiftKernel::airy();
        build_grid(s, m, &[&k]).unwrap()
    }

    #[test]
    fn grid_policy_airy_and_zero() {
        let g = airy_grid(0.0, 64);
        assert!(g.truncation >= 10.0, "T = {}", g.truncation);
        let z = ShiftKernel::new("zero", |_| 0.0);
        let g = build_grid(0.0, 8, &[&z]).unwrap();
        let wsum: f64 = g.weights.iter().sum();
        assert!((wsum - g.truncation).abs() < 1e-10);
        assert!(build_grid(0.0, 4, &[&z]).is_err());
    }

    #[test]
    fn grid_span_independent_of_m() {
        let a = airy_grid(-2.0, 64);
        let b = airy_grid(-2.0, 128);
        assert_eq!(a.truncation, b.truncation);
        assert_eq!(a.s, b.s);
    }

    #[test]
    fn nondecaying_kernel_is_rejected() {
        let k = ShiftKernel::new("const", |_| 1.0);
        assert!(build_grid(0.0, 16, &[&k]).is_err());
    }

    #[test]
    fn discretize_zero_and_symmetry() {
        let g = airy_grid(0.0, 32);
        let z = ShiftKernel::new("zero", |_| 0.0);
        let op = discretize(&z, &g).unwrap();
        assert!(op.matrix().iter().all(|&v| v == 0.0));
        let op = discretize(&ShiftKernel::airy(), &g).unwrap();
        let m = g.m;
        for i in 0..m {
            for j in 0..m {
                assert_eq!(op.matrix()[i * m + j], op.matrix()[j * m + i]);
            }
        }
    }

    #[test]
    fn airy_operator_spectrum_in_unit_interval() {
        let g = airy_grid(0.0, 128);
        let gop = discretize(&ShiftKernel::airy(), &g).unwrap();
        let s = compose_product_sum(&gop, &gop).unwrap();
        let ev = jacobi_eigenvalues(s.matrix(), g.m).unwrap();
        let max = ev.iter().cloned().fold(f64::MIN, f64::max);
        let min = ev.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max > 0.0 && max < 1.0, "max eig {max}");
        assert!(min > -1e-12, "min eig {min}");
    }

    #[test]
    fn compose_identities() {
        let g = airy_grid(-1.0, 48);
        let gop = discretize(&ShiftKernel::airy(), &g).unwrap();
        let z = discretize(&ShiftKernel::new("zero", |_| 0.0), &g).unwrap();
        // H = G: S = 2 G^2
        let s = compose_product_sum(&gop, &gop).unwrap();
        let g2 = mat_mul(gop.matrix(), gop.matrix(), g.m);
        for (a, b) in s.matrix().iter().zip(&g2) {
            assert!((a - 2.0 * b).abs() < 1e-14);
        }
        // H = 0: S = 0
        let s0 = compose_product_sum(&gop, &z).unwrap();
        assert!(s0.matrix().iter().all(|&v| v == 0.0));
        // trace(S) = 2 trace(G H)
        let s = compose_product_sum(&gop, &gop).unwrap();
        let tr_s: f64 = (0..g.m).map(|i| s.matrix()[i * g.m + i]).sum();
        let tr_g2: f64 = (0..g.m).map(|i| g2[i * g.m + i]).sum();
        assert!((tr_s - 2.0 * tr_g2).abs() < 1e-12 * (1.0 + tr_s.abs()));
        // grid mismatch is rejected
        let other = airy_grid(-1.0, 64);
        let hop = discretize(&ShiftKernel::airy(), &other).unwrap();
        assert!(compose_product_sum(&gop, &hop).is_err());
    }

    #[test]
    fn fredholm_det_zero_and_rank_one() {
        let g = airy_grid(0.0, 32);
        let z = discretize(&ShiftKernel::new("zero", |_| 0.0), &g).unwrap();
        assert_eq!(fredholm_det(&z), 1.0);
        // K(x, y) = a e^{-x} e^{-y} on [0, inf): det = 1 - a/2
        let decay = ShiftKernel::new("exp", |u| (-u).exp());
        let grid = build_grid(0.0, 96, &[&decay]).unwrap();
        for a in [0.3, 1.0, 1.9] {
            let op =
                discretize_symmetric(|x, y| Ok(a * (-x).exp() * (-y).exp()), &grid).unwrap();
            let d = fredholm_det(&op);
            assert!((d - (1.0 - a / 2.0)).abs() < 1e-10, "a={a}: det {d}");
        }
    }

    #[test]
    fn det_refinement_converges() {
        let build = |m: usize| {
            let grid = airy_grid(0.0, m);
            let gop = discretize(&ShiftKernel::airy(), &grid)?;
            let s = compose_product_sum(&gop, &gop)?;
            Ok(fredholm_det(&s))
        };
        let (d, m_used) = det_with_refinement(build, 64, 1e-9).unwrap();
        assert!(m_used <= 512);
        assert!(d > 0.9 && d < 1.0, "det {d}");
    }

    #[test]
    fn hs_norm_shift_examples() {
        let z = ShiftKernel::new("zero", |_| 0.0);
        assert_eq!(hs_norm_shift(&z, 0.0).unwrap(), 0.0);
        let e = ShiftKernel::new("halfexp", |u| (-0.5 * u).exp());
        let v = hs_norm_shift(&e, 0.0).unwrap();
        assert!((v - 1.0).abs() < 1e-10, "norm {v}");
        // result^2 equals the closed-form trace norm halved, for the Airy profile
        for s in [-2.0, 0.0, 1.5] {
            let v = hs_norm_shift(&ShiftKernel::airy(), s).unwrap();
            let expect = airy_trace_norm_closed(s) / 2.0;
            assert!((v * v - expect).abs() < 1e-10, "s={s}: {} vs {expect}", v * v);
        }
    }

    #[test]
    fn hs_norm_matches_discretized_frobenius() {
        let k = ShiftKernel::airy();
        let grid = airy_grid(-1.0, 128);
        let op = discretize(&k, &grid).unwrap();
        let exact = hs_norm_shift(&k, -1.0).unwrap();
        let frob = frobenius(op.matrix());
        assert!(
            ((frob - exact) / exact).abs() < 1e-6,
            "frobenius {frob} vs reduction {exact}"
        );
    }

    #[test]
    fn trace_norm_examples() {
        let g = QuadratureGrid {
            s: 0.0,
            m: 3,
            truncation: 1.0,
            nodes: vec![0.0, 0.5, 1.0],
            weights: vec![1.0, 1.0, 1.0],
        };
        let d = DiscretizedOperator::from_parts(
            g,
            vec![1.0, 0.0, 0.0, 0.0, -2.0, 0.0, 0.0, 0.0, 3.0],
        );
        assert_eq!(trace_norm(&d).unwrap(), 6.0);
        // PSD operator: trace norm equals trace
        let grid = airy_grid(0.0, 96);
        let gop = discretize(&ShiftKernel::airy(), &grid).unwrap();
        let s = compose_product_sum(&gop, &gop).unwrap();
        let tn = trace_norm(&s).unwrap();
        let tr: f64 = (0..grid.m).map(|i| s.matrix()[i * grid.m + i]).sum();
        assert!((tn - tr).abs() <= 1e-10 * (1.0 + tr), "{tn} vs {tr}");
    }

    #[test]
    fn airy_trace_norm_closed_values() {
        // frozen from the gamma-function values of Ai(0), Ai'(0)
        assert!((airy_trace_norm_closed(0.0) - 0.03062938307898844719507).abs() < 1e-14);
        assert!(airy_trace_norm_closed(5.0) <= 1e-6);
        // nonincreasing on a coarse grid
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let s = -4.0 + 0.5 * i as f64;
            let v = airy_trace_norm_closed(s);
            assert!(v >= 0.0 && v <= prev);
            prev = v;
        }
    }

    #[test]
    fn airy_trace_norm_against_double_quadrature() {
        // independent route: int_0^inf int_s^inf Ai^2(x+u) dx du at s = -1
        let s = -1.0;
        let inner = |u: f64| {
            adaptive_to_inf(&|x: f64| airy_ai(x + u).powi(2), s, 5.0, 1e-13).unwrap()
        };
        let outer = adaptive_to_inf(&inner, 0.0, 5.0, 1e-11).unwrap();
        let closed = airy_trace_norm_closed(s);
        assert!((outer - closed).abs() <= 1e-8, "{outer} vs {closed}");
    }

    #[test]
    fn seiler_simon_holds_on_rank_one_pair() {
        let decay = ShiftKernel::new("exp", |u| (-u).exp());
        let grid = build_grid(0.0, 96, &[&decay]).unwrap();
        let a_op = discretize_symmetric(|x, y| Ok(0.8 * (-x).exp() * (-y).exp()), &grid).unwrap();
        let b_op = discretize_symmetric(|x, y| Ok(0.3 * (-x).exp() * (-y).exp()), &grid).unwrap();
        let lhs = (fredholm_det(&a_op) - fredholm_det(&b_op)).abs();
        let analytic = ((1.0 - 0.4f64) - (1.0 - 0.15)).abs();
        assert!((lhs - analytic).abs() < 1e-10);
        let bound = seiler_simon_bound(&a_op, &b_op).unwrap();
        assert!(lhs <= bound, "{lhs} > {bound}");
        assert_eq!(seiler_simon_bound(&a_op, &a_op).unwrap(), 0.0);
    }

    #[test]
    fn lemma2_trivial_and_perturbed() {
        let grid = airy_grid(0.0, 64);
        let gop = discretize(&ShiftKernel::airy(), &grid).unwrap();
        let (lhs, rhs) = lemma2_bound(&gop, &gop, &gop).unwrap();
        assert!(lhs.abs() < 1e-12 && rhs.abs() < 1e-12);
        // random symmetric perturbations of G keep the inequality
        let mut state = 0x6a09e667f3bcc908u64;
        let mut rng = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let m = grid.m;
        for trial in 0..100 {
            let scale = 1e-3 * (1.0 + (trial % 7) as f64);
            let mut pg = gop.matrix().to_vec();
            let mut ph = gop.matrix().to_vec();
            for i in 0..m {
                for j in 0..=i {
                    let dg = scale * rng();
                    let dh = scale * rng();
                    pg[i * m + j] += dg;
                    pg[j * m + i] = pg[i * m + j];
                    ph[i * m + j] += dh;
                    ph[j * m + i] = ph[i * m + j];
                }
            }
            let g_t = DiscretizedOperator::from_parts(grid.clone(), pg);
            let h_t = DiscretizedOperator::from_parts(grid.clone(), ph);
            let (lhs, rhs) = lemma2_bound(&g_t, &h_t, &gop).unwrap();
            assert!(lhs <= rhs + 1e-10, "trial {trial}: {lhs} > {rhs}");
        }
    }
}
