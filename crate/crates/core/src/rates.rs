//! Sweep drivers that operationalize the convergence-rate claims: kernel
//! deviations at the pointwise level, Hilbert-Schmidt norms of operator
//! differences, the exponentially weighted CDF distance, and the empirical
//! envelope of the determinant-comparison bound. An O(N^-beta) claim becomes
//! (a) boundedness of N^beta times the measured quantity over a geometric
//! N grid and (b) a fitted log-log slope.

use crate::error::{Error, Result};
use crate::finite_n::{cdf_exact_tol, make_kernels, RescaledKernels};
use crate::operators::{
    airy_trace_norm_closed, build_grid, compose_product_sum, discretize, fredholm_det,
    hs_norm_shift, lemma2_bound, seiler_simon_bound, trace_norm_matrix, ShiftKernel,
    DEFAULT_GRID_M,
};
use crate::sequences::{sequences_of_kind, SeqKind};
use crate::specfun::{airy_ai, WishartPair};
use crate::tw::f2_fredholm;
use serde::Serialize;

/// Result of one sweep: the measured quantity over (N, s), its scaled
/// envelope, and the fitted slope of the weighted maxima.
#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub label: String,
    pub gamma: f64,
    pub n_grid: Vec<u32>,
    pub s_grid: Vec<f64>,
    /// Claimed exponent: envelope scales the quantity by N^beta.
    pub beta: f64,
    /// Exponential weight rate w: weighted quantity is e^{w s} * raw.
    pub weight_rate: f64,
    /// raw[i][j] = quantity at (n_grid[i], s_grid[j]).
    pub raw: Vec<Vec<f64>>,
    /// Per-N max over s of e^{w s} N^beta raw.
    pub scaled_envelope: Vec<f64>,
    /// Least-squares slope of log(max_s e^{w s} raw) against log N.
    pub fitted_slope: f64,
}

fn log_log_slope(ns: &[u32], maxima: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(maxima)
        .filter(|&(_, &v)| v > 0.0)
        .map(|(&n, &v)| ((n as f64).ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn assemble(
    label: &str,
    gamma: f64,
    n_grid: &[u32],
    s_grid: &[f64],
    beta: f64,
    weight_rate: f64,
    raw: Vec<Vec<f64>>,
) -> RateReport {
    let weighted_max: Vec<f64> = raw
        .iter()
        .zip(n_grid)
        .map(|(row, &_n)| {
            row.iter()
                .zip(s_grid)
                .map(|(&v, &s)| (weight_rate * s).exp() * v)
                .fold(0.0f64, f64::max)
        })
        .collect();
    let scaled_envelope: Vec<f64> = weighted_max
        .iter()
        .zip(n_grid)
        .map(|(&v, &n)| (n as f64).powf(beta) * v)
        .collect();
    let fitted_slope = log_log_slope(n_grid, &weighted_max);
    RateReport {
        label: label.into(),
        gamma,
        n_grid: n_grid.to_vec(),
        s_grid: s_grid.to_vec(),
        beta,
        weight_rate,
        raw,
        scaled_envelope,
        fitted_slope,
    }
}

pub const DEFAULT_S_GRID: [f64; 9] = [-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 6.0];
pub const DEFAULT_N_GRID_GAMMA1: [u32; 4] = [10, 20, 40, 80];
pub const DEFAULT_N_GRID_GAMMA4: [u32; 3] = [10, 20, 40];

fn pair_for(gamma: u32, cols: u32) -> Result<WishartPair> {
    WishartPair::new(gamma * cols, cols)
}

fn kernels_for(gamma: u32, cols: u32, kind: SeqKind) -> Result<RescaledKernels> {
    let pair = pair_for(gamma, cols)?;
    let cs = sequences_of_kind(pair, kind);
    Ok(make_kernels(pair, &cs))
}

/// Pointwise kernel deviations: the matched sum at the 2/3 exponent and
/// each single kernel at 1/3, all weighted by e^{z/2}.
pub fn fact221_sweep(
    gamma: u32,
    n_grid: &[u32],
    s_grid: &[f64],
    kind: SeqKind,
) -> Result<[RateReport; 3]> {
    let mut raw_sum = Vec::with_capacity(n_grid.len());
    let mut raw_phi = Vec::with_capacity(n_grid.len());
    let mut raw_psi = Vec::with_capacity(n_grid.len());
    for &cols in n_grid {
        let k = kernels_for(gamma, cols, kind)?;
        let mut row_sum = Vec::with_capacity(s_grid.len());
        let mut row_phi = Vec::with_capacity(s_grid.len());
        let mut row_psi = Vec::with_capacity(s_grid.len());
        for &z in s_grid {
            let phi = k.phi_tau.eval(z)?;
            let psi = k.psi_tau.eval(z)?;
            let g = airy_ai(z) / std::f64::consts::SQRT_2;
            row_sum.push((phi + psi - 2.0 * g).abs());
            row_phi.push((phi - g).abs());
            row_psi.push((psi - g).abs());
        }
        raw_sum.push(row_sum);
        raw_phi.push(row_phi);
        raw_psi.push(row_psi);
    }
    let g = gamma as f64;
    Ok([
        assemble("kernel-sum", g, n_grid, s_grid, 2.0 / 3.0, 0.5, raw_sum),
        assemble("kernel-phi", g, n_grid, s_grid, 1.0 / 3.0, 0.5, raw_phi),
        assemble("kernel-psi", g, n_grid, s_grid, 1.0 / 3.0, 0.5, raw_psi),
    ])
}

fn difference_profile(k: &RescaledKernels, which: Which) -> ShiftKernel {
    let phi = k.phi_tau.clone();
    let psi = k.psi_tau.clone();
    let z_min = k.z_min;
    match which {
        Which::Sum => ShiftKernel::with_min_arg("sum-minus-limit", z_min, move |u| {
            phi.eval_unchecked(u) + psi.eval_unchecked(u)
                - std::f64::consts::SQRT_2 * airy_ai(u)
        }),
        Which::Phi => ShiftKernel::with_min_arg("phi-minus-limit", z_min, move |u| {
            phi.eval_unchecked(u) - airy_ai(u) / std::f64::consts::SQRT_2
        }),
        Which::Psi => ShiftKernel::with_min_arg("psi-minus-limit", z_min, move |u| {
            psi.eval_unchecked(u) - airy_ai(u) / std::f64::consts::SQRT_2
        }),
    }
}

enum Which {
    Sum,
    Phi,
    Psi,
}

/// Hilbert-Schmidt norms of the operator differences, via the exact
/// one-dimensional reduction, weighted by e^{s/2}.
pub fn lemma3_sweep(
    gamma: u32,
    n_grid: &[u32],
    s_grid: &[f64],
    kind: SeqKind,
) -> Result<[RateReport; 3]> {
    let mut raws = [
        Vec::with_capacity(n_grid.len()),
        Vec::with_capacity(n_grid.len()),
        Vec::with_capacity(n_grid.len()),
    ];
    for &cols in n_grid {
        let k = kernels_for(gamma, cols, kind)?;
        let profiles = [
            difference_profile(&k, Which::Sum),
            difference_profile(&k, Which::Phi),
            difference_profile(&k, Which::Psi),
        ];
        for (raw, profile) in raws.iter_mut().zip(&profiles) {
            let row: Vec<f64> = s_grid
                .iter()
                .map(|&s| hs_norm_shift(profile, s))
                .collect::<Result<_>>()?;
            raw.push(row);
        }
    }
    let [raw_sum, raw_phi, raw_psi] = raws;
    let g = gamma as f64;
    Ok([
        assemble("hs-sum", g, n_grid, s_grid, 2.0 / 3.0, 0.5, raw_sum),
        assemble("hs-phi", g, n_grid, s_grid, 1.0 / 3.0, 0.5, raw_phi),
        assemble("hs-psi", g, n_grid, s_grid, 1.0 / 3.0, 0.5, raw_psi),
    ])
}

/// Exponentially weighted CDF distance d_N(s) = e^s |cdf_exact - F2|,
/// envelope at the 2/3 exponent. With `check_bounds` the determinant
/// comparison inequalities are verified at every visited cell.
pub fn theorem2_sweep(
    gamma: u32,
    n_grid: &[u32],
    s_grid: &[f64],
    kind: SeqKind,
    det_tol: f64,
    check_bounds: bool,
) -> Result<RateReport> {
    let limit: Vec<f64> = s_grid.iter().map(|&s| f2_fredholm(s)).collect::<Result<_>>()?;
    let mut raw = Vec::with_capacity(n_grid.len());
    for &cols in n_grid {
        let pair = pair_for(gamma, cols)?;
        let cs = sequences_of_kind(pair, kind);
        let mut row = Vec::with_capacity(s_grid.len());
        for (&s, &f2) in s_grid.iter().zip(&limit) {
            let cdf = cdf_exact_tol(pair, &cs, s, det_tol)?;
            row.push((cdf - f2).abs());
            if check_bounds {
                verify_determinant_bounds(gamma, cols, kind, s)?;
            }
        }
        raw.push(row);
    }
    Ok(assemble("cdf-distance", gamma as f64, n_grid, s_grid, 2.0 / 3.0, 1.0, raw))
}

/// Lemma-level inequalities at one (N, s) cell: the product-sum trace bound
/// and the determinant-difference bound.
fn verify_determinant_bounds(gamma: u32, cols: u32, kind: SeqKind, s: f64) -> Result<()> {
    let k = kernels_for(gamma, cols, kind)?;
    let airy = ShiftKernel::airy();
    let grid = build_grid(s, DEFAULT_GRID_M, &[&k.phi_tau, &k.psi_tau, &airy])?;
    let g_t = discretize(&k.phi_tau, &grid)?;
    let h_t = discretize(&k.psi_tau, &grid)?;
    let g = discretize(&airy, &grid)?;
    let (lhs, rhs) = lemma2_bound(&g_t, &h_t, &g)?;
    if lhs > rhs + 1e-10 {
        return Err(Error::Convergence(format!(
            "product-sum trace bound violated at N={cols}, s={s}: {lhs} > {rhs}"
        )));
    }
    let s_tau = compose_product_sum(&g_t, &h_t)?;
    let s_bar = compose_product_sum(&g, &g)?;
    let det_gap = (fredholm_det(&s_tau) - fredholm_det(&s_bar)).abs();
    let bound = seiler_simon_bound(&s_tau, &s_bar)?;
    if det_gap > bound + 1e-10 {
        return Err(Error::Convergence(format!(
            "determinant-difference bound violated at N={cols}, s={s}: {det_gap} > {bound}"
        )));
    }
    Ok(())
}

/// One row of the empirical bounding-function table.
#[derive(Debug, Clone, Serialize)]
pub struct MEnvelopeRow {
    pub s0: f64,
    /// max over the grid restricted to s >= s0 of e^{s/2} N^{2/3} ||S - Sbar||_1.
    pub c_hat: f64,
    /// Closed-form ||Sbar||_1(s0).
    pub sbar_trace: f64,
    /// c_hat * exp(2 + 2 ||Sbar||_1(s0)).
    pub m_hat: f64,
}

/// Empirical envelope of the bounding function over a grid of left endpoints.
/// Rows come out nonincreasing in s0 by construction (cumulative max).
pub fn m_envelope(
    gamma: u32,
    n_grid: &[u32],
    s0_grid: &[f64],
    kind: SeqKind,
) -> Result<Vec<MEnvelopeRow>> {
    let mut s0_sorted = s0_grid.to_vec();
    s0_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // trace-norm distance at every (N, s0) cell
    let mut cell = vec![vec![0.0f64; s0_sorted.len()]; n_grid.len()];
    for (i, &cols) in n_grid.iter().enumerate() {
        let k = kernels_for(gamma, cols, kind)?;
        let airy = ShiftKernel::airy();
        for (j, &s) in s0_sorted.iter().enumerate() {
            let grid = build_grid(s, DEFAULT_GRID_M, &[&k.phi_tau, &k.psi_tau, &airy])?;
            let g_t = discretize(&k.phi_tau, &grid)?;
            let h_t = discretize(&k.psi_tau, &grid)?;
            let g = discretize(&airy, &grid)?;
            let s_tau = compose_product_sum(&g_t, &h_t)?;
            let s_bar = compose_product_sum(&g, &g)?;
            let diff: Vec<f64> = s_tau
                .matrix()
                .iter()
                .zip(s_bar.matrix())
                .map(|(a, b)| a - b)
                .collect();
            let d1 = trace_norm_matrix(&diff, grid.m)?;
            cell[i][j] = (0.5 * s).exp() * (cols as f64).powf(2.0 / 3.0) * d1;
        }
    }
    // cumulative max from the right: C(s0) = max over s >= s0
    let mut rows: Vec<MEnvelopeRow> = Vec::with_capacity(s0_sorted.len());
    let mut c_run = 0.0f64;
    for j in (0..s0_sorted.len()).rev() {
        for row in cell.iter() {
            c_run = c_run.max(row[j]);
        }
        let s0 = s0_sorted[j];
        let sbar = airy_trace_norm_closed(s0);
        rows.push(MEnvelopeRow {
            s0,
            c_hat: c_run,
            sbar_trace: sbar,
            m_hat: c_run * (2.0 + 2.0 * sbar).exp(),
        });
    }
    rows.reverse();
    Ok(rows)
}
