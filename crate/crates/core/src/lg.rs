//! Turning-point (Liouville-Green) frame for the weighted Laguerre functions:
//! the coefficient functions f and g, the zeta change of variables, the
//! Airy-based approximation to the scaled Laguerre function, and the
//! deviation quantities used by the rate experiments.
//!
//! In the xi = x/kappa variable the function satisfies
//! w'' = (kappa^2 f(xi) + g(xi)) w with a simple zero of f at xi2 (the soft
//! edge, kappa*xi2 = mu). zeta straightens f into the Airy equation:
//! (2/3) zeta^{3/2} = int_{xi2}^{xi} sqrt(f), continued through the turning
//! point with the matching negative branch.

use crate::error::{Error, Result};
use crate::quad::adaptive;
use crate::sequences::{
    lg_params, naive_sequences, r_n_exact, shifted_naive, CenteringScaling, KernelSide, LGParams,
};
use crate::specfun::{airy_ai, scaled_laguerre, WishartPair};

/// Immutable per-pair frame: turning-point parameters plus quadrature policy.
#[derive(Debug, Clone, Copy)]
pub struct LGFrame {
    pub pair: WishartPair,
    pub params: LGParams,
    pub quad_tol: f64,
}

impl LGFrame {
    pub fn new(pair: WishartPair) -> Self {
        LGFrame { pair, params: lg_params(pair), quad_tol: 1e-12 }
    }
}

/// f(xi) = (xi - xi1)(xi - xi2) / (4 xi^2); negative between the turning points.
pub fn f_of_xi(params: &LGParams, xi: f64) -> Result<f64> {
    if !(xi > 0.0) {
        return Err(Error::Domain(format!("f_of_xi: xi = {xi} must be > 0")));
    }
    Ok((xi - params.xi1) * (xi - params.xi2) / (4.0 * xi * xi))
}

/// g(xi) = -1 / (4 xi^2).
pub fn g_of_xi(xi: f64) -> Result<f64> {
    if !(xi > 0.0) {
        return Err(Error::Domain(format!("g_of_xi: xi = {xi} must be > 0")));
    }
    Ok(-1.0 / (4.0 * xi * xi))
}

/// Signed zeta(xi): zero at xi2, positive beyond, negative between the
/// turning points. The square-root vanishing of f at xi2 is removed by the
/// substitution t = xi2 +/- w^2, leaving a smooth integrand.
pub fn zeta_of_xi(frame: &LGFrame, xi: f64) -> Result<f64> {
    let p = &frame.params;
    if !(xi > p.xi1) {
        return Err(Error::Range(format!(
            "zeta_of_xi: xi = {xi} must exceed the lower turning point {}",
            p.xi1
        )));
    }
    let gap = p.gap_alpha;
    let xi2 = p.xi2;
    if xi == xi2 {
        return Ok(0.0);
    }
    let w_max = (xi - xi2).abs().sqrt();
    // tolerance scaled by the integral's natural size so small intervals keep
    // relative accuracy
    let tol = frame.quad_tol * (w_max.powi(3) * 0.5).max(1e-280);
    if xi > xi2 {
        let f = |w: f64| w * w * (w * w + gap).sqrt() / (xi2 + w * w);
        let integral = adaptive(&f, 0.0, w_max, tol)?;
        Ok((1.5 * integral).powf(2.0 / 3.0))
    } else {
        let f = |w: f64| w * w * (gap - w * w).sqrt() / (xi2 - w * w);
        let integral = adaptive(&f, 0.0, w_max, tol)?;
        Ok(-(1.5 * integral).powf(2.0 / 3.0))
    }
}

/// (kappa / sigma^3)^{1/6} * (f/zeta)^{-1/4}; equals 1 at the turning point.
/// Within |xi - xi2| < 1e-4 the 0/0 is replaced by the local expansion
/// 1 - (2/5) eta eps + O(eps^2), whose truncation matches the continuity
/// tolerance of the direct branch.
pub fn fhat_quarter_factor(frame: &LGFrame, xi: f64) -> Result<f64> {
    let p = &frame.params;
    let eps = xi - p.xi2;
    if eps.abs() < 1e-4 {
        return Ok(1.0 - 0.4 * p.eta * eps);
    }
    let sigma = naive_sequences(frame.pair).sigma;
    let f = f_of_xi(p, xi)?;
    let zeta = zeta_of_xi(frame, xi)?;
    let fhat = f / zeta;
    Ok((p.kappa / sigma.powi(3)).powf(1.0 / 6.0) * fhat.powf(-0.25))
}

/// kappa^{2/3} zeta(x/kappa) - the Airy argument of the approximation.
pub fn scaled_zeta(frame: &LGFrame, x: f64) -> Result<f64> {
    let kappa = frame.params.kappa;
    Ok(kappa.powf(2.0 / 3.0) * zeta_of_xi(frame, x / kappa)?)
}

/// First-order expansion of `scaled_zeta`:
/// (eps kappa / sigma)(1 + (2/5) eps eta), eps = x/kappa - xi2.
/// Kept as an independent cross-check of the quadrature route.
pub fn scaled_zeta_expansion(frame: &LGFrame, x: f64) -> f64 {
    let p = &frame.params;
    let sigma = naive_sequences(frame.pair).sigma;
    let eps = x / p.kappa - p.xi2;
    eps * p.kappa / sigma * (1.0 + 0.4 * eps * p.eta)
}

/// Airy-based approximation to `scaled_laguerre`:
/// r (kappa/sigma^3)^{1/6} (f/zeta)^{-1/4} Ai(kappa^{2/3} zeta) at xi = x/kappa.
pub fn lg_approx(frame: &LGFrame, x: f64) -> Result<f64> {
    let p = &frame.params;
    let xi = x / p.kappa;
    if !(xi > p.xi1) {
        return Err(Error::Range(format!(
            "lg_approx: x = {x} is at or below the lower turning point"
        )));
    }
    let r = r_n_exact(frame.pair)?;
    Ok(r * fhat_quarter_factor(frame, xi)? * airy_ai(scaled_zeta(frame, x)?))
}

/// Deviation of one side's scaled Laguerre function from the Airy frame at
/// the rescaled coordinate s.
#[derive(Debug, Clone, Copy)]
pub struct DeviationReport {
    pub s: f64,
    /// |theta - r Ai(kappa^{2/3} zeta)|: the Liouville-Green residual.
    pub b: f64,
    /// Ai(kappa^{2/3} zeta) - Ai(s): the Airy-argument mismatch.
    pub d: f64,
    /// kappa^{2/3} zeta - s.
    pub u: f64,
    /// x/kappa - xi2.
    pub epsilon: f64,
    pub zeta_scaled: f64,
}

/// Evaluates theta = F (mu_side / x) against the Airy frame of the shifted
/// pair selected by `side` ((n-1, N) for phi, (n, N-1) for psi) at
/// x = cs.mu + cs.sigma * s.
pub fn deviation_report(
    pair: WishartPair,
    cs: &CenteringScaling,
    side: KernelSide,
    s: f64,
) -> Result<DeviationReport> {
    let (rows, cols) = match side {
        KernelSide::Phi => (pair.rows() - 1, pair.cols()),
        KernelSide::Psi => (pair.rows(), pair.cols() - 1),
    };
    if rows == 0 || cols == 0 {
        return Err(Error::Domain(
            "deviation_report: shifted pair has a zero dimension".into(),
        ));
    }
    let shifted = WishartPair::new(rows, cols)?;
    let frame = LGFrame::new(shifted);
    let x = cs.mu + cs.sigma * s;
    if !(x > frame.params.kappa * frame.params.xi1) {
        return Err(Error::Range(format!(
            "deviation_report: x = {x} at or below the lower turning point"
        )));
    }
    let mu_side = naive_sequences(shifted).mu;
    let theta = scaled_laguerre(shifted, x)? * (mu_side / x);
    let zs = scaled_zeta(&frame, x)?;
    let r = r_n_exact(shifted)?;
    Ok(DeviationReport {
        s,
        b: (theta - r * airy_ai(zs)).abs(),
        d: airy_ai(zs) - airy_ai(s),
        u: zs - s,
        epsilon: x / frame.params.kappa - frame.params.xi2,
        zeta_scaled: zs,
    })
}

/// Convenience used by the rate experiments: the shifted pair's naive center.
pub fn side_center(pair: WishartPair, side: KernelSide) -> f64 {
    let ((mu_a, _), (mu_b, _)) = shifted_naive(pair);
    match side {
        KernelSide::Phi => mu_a,
        KernelSide::Psi => mu_b,
    }
}
