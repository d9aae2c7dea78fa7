//! The Tracy-Widom F2 distribution, computed two independent ways:
//! through the Hastings-McLeod solution of Painleve II, and as the Fredholm
//! determinant of the squared Airy operator. The two routes share no code
//! beyond the Airy function itself, so their agreement is a real check.
//!
//! The Painleve solver is an adaptive Taylor-series method: the equation
//! q'' = x q + 2 q^3 is polynomial, so local Taylor coefficients follow from
//! a convolution recurrence, and each accepted step keeps its coefficient
//! table as spectrally accurate dense output. Integration runs backward from
//! q ~ Ai at a large positive seed, the direction in which the wanted
//! solution is stable until deep in the left tail.

use crate::error::{Error, Result};
use crate::operators::{
    build_grid, compose_product_sum, det_with_refinement, discretize, fredholm_det, ShiftKernel,
    DEFAULT_GRID_M,
};
use crate::quad::{adaptive, adaptive_to_inf};
use crate::specfun::{airy_ai, airy_ai_prime};
use std::sync::OnceLock;

const TAYLOR_TERMS: usize = 26;
const BLOWUP_LIMIT: f64 = 1e6;

/// One accepted integration node with its local Taylor coefficient table.
#[derive(Debug, Clone)]
struct Segment {
    x: f64,
    coeff: [f64; TAYLOR_TERMS + 2],
}

/// Dense backward solution of q'' = x q + 2 q^3 with q ~ Ai at +inf.
#[derive(Debug, Clone)]
pub struct Painleve2Solution {
    pub x_start: f64,
    pub x_end: f64,
    segments: Vec<Segment>, // descending in x
}

/// Taylor coefficients at (x0, q, dq) via the convolution recurrence.
fn p2_series(x0: f64, q: f64, dq: f64) -> [f64; TAYLOR_TERMS + 2] {
    let mut a = [0.0f64; TAYLOR_TERMS + 2];
    let mut sq = [0.0f64; TAYLOR_TERMS + 2]; // a * a
    let mut cu = [0.0f64; TAYLOR_TERMS + 2]; // a * a * a
    a[0] = q;
    a[1] = dq;
    for k in 0..TAYLOR_TERMS {
        // sq[k] and cu[k] need a[0..=k] only
        let mut s = 0.0;
        for i in 0..=k {
            s += a[i] * a[k - i];
        }
        sq[k] = s;
        let mut c = 0.0;
        for i in 0..=k {
            c += sq[i] * a[k - i];
        }
        cu[k] = c;
        let linear = x0 * a[k] + if k == 0 { 0.0 } else { a[k - 1] };
        a[k + 2] = (linear + 2.0 * cu[k]) / (((k + 1) * (k + 2)) as f64);
    }
    a
}

fn eval_series(coeff: &[f64], h: f64) -> (f64, f64) {
    let mut v = 0.0f64;
    let mut d = 0.0f64;
    for k in (1..coeff.len()).rev() {
        v = v.mul_add(h, coeff[k]);
        d = d.mul_add(h, coeff[k] * k as f64);
    }
    (v.mul_add(h, coeff[0]), d)
}

/// Integrate backward from (q, q') = (Ai, Ai')(x_start) down to x_end.
pub fn solve_painleve2(x_start: f64, x_end: f64, tol: f64) -> Result<Painleve2Solution> {
    if !(x_start >= 6.0) {
        return Err(Error::Domain(format!(
            "solve_painleve2: x_start = {x_start} must be >= 6 for the Airy seed"
        )));
    }
    if !(x_end >= -12.0 && x_end < x_start) {
        return Err(Error::Domain(format!(
            "solve_painleve2: x_end = {x_end} must lie in [-12, x_start)"
        )));
    }
    let tol = tol.clamp(1e-15, 1e-6);
    let mut x = x_start;
    let mut q = airy_ai(x_start);
    let mut dq = airy_ai_prime(x_start);
    let mut segments = Vec::with_capacity(1024);
    while x > x_end {
        if !q.is_finite() || q.abs() > BLOWUP_LIMIT {
            return Err(Error::Convergence(format!(
                "Painleve II solution blew up near x = {x}; use a larger (less negative) x_end"
            )));
        }
        let coeff = p2_series(x, q, dq);
        // step from the tail coefficients, relative to the local solution size
        let scale = q.abs().max(dq.abs()).max(1e-12);
        let mut h: f64 = 0.5;
        for k in (TAYLOR_TERMS - 3)..=TAYLOR_TERMS {
            let ck = coeff[k].abs();
            if ck > 0.0 {
                h = h.min((tol * scale / ck).powf(1.0 / k as f64));
            }
        }
        let h = h.clamp(1e-3, 0.5);
        let step = if x - h <= x_end { x_end - x } else { -h };
        segments.push(Segment { x, coeff });
        let (nq, ndq) = eval_series(&coeff, step);
        x += step;
        // guard against leaving the positive branch deep in the tail
        if nq <= 0.0 {
            return Err(Error::Convergence(format!(
                "Painleve II solution lost positivity near x = {x}; use a larger x_end"
            )));
        }
        q = nq;
        dq = ndq;
        if segments.len() > 2_000_000 {
            return Err(Error::Convergence("Painleve II step count exploded".into()));
        }
    }
    segments.push(Segment { x, coeff: p2_series(x, q, dq) });
    Ok(Painleve2Solution { x_start, x_end, segments })
}

impl Painleve2Solution {
    fn segment_for(&self, x: f64) -> Result<&Segment> {
        if !(x >= self.x_end && x <= self.x_start) {
            return Err(Error::Range(format!(
                "Painleve II query x = {x} outside [{}, {}]",
                self.x_end, self.x_start
            )));
        }
        // segments are descending in x; find the last one with seg.x >= x
        let idx = self.segments.partition_point(|s| s.x >= x);
        Ok(&self.segments[idx.saturating_sub(1).min(self.segments.len() - 1)])
    }

    pub fn q(&self, x: f64) -> Result<f64> {
        let seg = self.segment_for(x)?;
        Ok(eval_series(&seg.coeff, x - seg.x).0)
    }

    pub fn q_prime(&self, x: f64) -> Result<f64> {
        let seg = self.segment_for(x)?;
        Ok(eval_series(&seg.coeff, x - seg.x).1)
    }

    pub fn node_xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments.iter().map(|s| s.x)
    }
}

pub const DEFAULT_X_START: f64 = 8.0;
pub const DEFAULT_X_END: f64 = -10.0;

fn default_solution() -> &'static Painleve2Solution {
    static SOL: OnceLock<Painleve2Solution> = OnceLock::new();
    SOL.get_or_init(|| {
        solve_painleve2(DEFAULT_X_START, DEFAULT_X_END, 1e-13)
            .expect("default Painleve II solve cannot fail")
    })
}

/// F2 via the Painleve representation exp(-int_s^inf (x-s) q^2 dx), with the
/// tail above the seed point taken along the Airy asymptote.
pub fn f2_painleve(s: f64) -> Result<f64> {
    f2_painleve_with(default_solution(), s)
}

pub fn f2_painleve_with(sol: &Painleve2Solution, s: f64) -> Result<f64> {
    if s < sol.x_end {
        return Err(Error::Range(format!(
            "f2_painleve: s = {s} below the solved range start {}",
            sol.x_end
        )));
    }
    let body = if s < sol.x_start {
        adaptive(
            &|x: f64| (x - s) * sol.q(x).unwrap_or(f64::NAN).powi(2),
            s,
            sol.x_start,
            1e-13,
        )?
    } else {
        0.0
    };
    let lo = s.max(sol.x_start);
    let tail = adaptive_to_inf(&|x: f64| (x - s) * airy_ai(x).powi(2), lo, 4.0, 1e-15)?;
    Ok((-(body + tail)).exp().clamp(0.0, 1.0))
}

/// F2 as det(I - 2 G^2) with the Airy shift kernel G, grid-refined.
pub fn f2_fredholm(s: f64) -> Result<f64> {
    f2_fredholm_tol(s, 1e-9)
}

pub fn f2_fredholm_tol(s: f64, tol: f64) -> Result<f64> {
    if s < -10.0 {
        return Err(Error::Range(format!("f2_fredholm: s = {s} below the served range -10")));
    }
    let kernel = ShiftKernel::airy();
    let (det, _) = det_with_refinement(
        |m| {
            let grid = build_grid(s, m, &[&kernel])?;
            let g = discretize(&kernel, &grid)?;
            let s_bar = compose_product_sum(&g, &g)?;
            Ok(fredholm_det(&s_bar))
        },
        DEFAULT_GRID_M,
        tol,
    )?;
    Ok(det.clamp(0.0, 1.0))
}

const QUANTILE_GRID_LO: f64 = -10.0;
const QUANTILE_GRID_HI: f64 = 6.0;
const QUANTILE_GRID_N: usize = 1201;

/// Coarse CDF table used to bracket quantile queries, built once on first use.
fn quantile_grid() -> &'static Vec<(f64, f64)> {
    static GRID: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    GRID.get_or_init(|| {
        let kernel = ShiftKernel::airy();
        (0..QUANTILE_GRID_N)
            .map(|i| {
                let s = QUANTILE_GRID_LO
                    + (QUANTILE_GRID_HI - QUANTILE_GRID_LO) * i as f64
                        / (QUANTILE_GRID_N - 1) as f64;
                // single-shot determinant; bisection refines with the full route
                let grid = build_grid(s, DEFAULT_GRID_M, &[&kernel]).expect("grid");
                let g = discretize(&kernel, &grid).expect("discretize");
                let s_bar = compose_product_sum(&g, &g).expect("compose");
                (s, fredholm_det(&s_bar).clamp(0.0, 1.0))
            })
            .collect()
    })
}

/// Inverse CDF by bracketed bisection on the Fredholm route.
pub fn tw_quantile(p: f64) -> Result<f64> {
    if !(p > 0.001 && p < 0.9999) {
        return Err(Error::Range(format!(
            "tw_quantile: p = {p} outside the covered range (0.001, 0.9999)"
        )));
    }
    let grid = quantile_grid();
    let idx = grid.partition_point(|&(_, f)| f < p);
    let step = (QUANTILE_GRID_HI - QUANTILE_GRID_LO) / (QUANTILE_GRID_N - 1) as f64;
    let mut lo = grid[idx.saturating_sub(1)].0 - step;
    let mut hi = grid[idx.min(QUANTILE_GRID_N - 1)].0 + step;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f = f2_fredholm(mid)?;
        if (f - p).abs() <= 1e-8 {
            return Ok(mid);
        }
        if f < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Err(Error::Convergence(format!("tw_quantile: bisection stalled for p = {p}")))
}
