//! Centering and scaling sequences for the rescaled largest eigenvalue,
//! the Whittaker/turning-point parameters, and scalar diagnostics.
//!
//! The naive pair is
//!   mu = (sqrt(n+1/2) + sqrt(N+1/2))^2,
//!   sigma = (sqrt(n+1/2) + sqrt(N+1/2)) ((n+1/2)^{-1/2} + (N+1/2)^{-1/2})^{1/3}.
//! The refined pair mixes the naive sequences of the shifted pairs (n-1, N)
//! and (n, N-1) so that both first-order deviation terms (`centering_defect`
//! and `scaling_defect` below) cancel exactly.

use crate::error::Result;
use crate::specfun::WishartPair;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeqKind {
    Naive,
    Refined,
}

/// A (center, scale) pair in eigenvalue units.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CenteringScaling {
    pub mu: f64,
    pub sigma: f64,
    pub kind: SeqKind,
}

/// Which of the two kernel profiles a shifted-pair quantity belongs to:
/// the phi side uses (n-1, N), the psi side uses (n, N-1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelSide {
    Phi,
    Psi,
}

/// Turning-point frame of the scaled second-order ODE satisfied by the
/// weighted Laguerre functions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LGParams {
    pub kappa: f64,
    pub lambda: f64,
    /// 2 lambda / kappa, in [0, 2).
    pub omega: f64,
    pub xi1: f64,
    pub xi2: f64,
    /// xi2 - xi1 = 2 sqrt(4 - omega^2).
    pub gap_alpha: f64,
    /// xi2 itself, kept under a separate name because it enters the
    /// expansion coefficients in a different role than the turning point.
    pub beta_xi: f64,
    /// 1/(2 gap_alpha) - 1/beta_xi.
    pub eta: f64,
}

/// Naive center/scale from the half-shifted dimensions directly. Callers pass
/// e.g. (n - 1/2, N + 1/2) for the (n-1, N) shifted pair; N = 0 shifts stay
/// finite because only N + 1/2 enters.
pub fn naive_from_plus(n_plus: f64, m_plus: f64) -> (f64, f64) {
    let root = n_plus.sqrt() + m_plus.sqrt();
    let mu = root * root;
    let sigma = root * (1.0 / n_plus.sqrt() + 1.0 / m_plus.sqrt()).cbrt();
    (mu, sigma)
}

pub fn naive_sequences(pair: WishartPair) -> CenteringScaling {
    let (mu, sigma) = naive_from_plus(pair.rows() as f64 + 0.5, pair.cols() as f64 + 0.5);
    CenteringScaling { mu, sigma, kind: SeqKind::Naive }
}

/// Shifted-pair naive sequences used by the refined construction:
/// ((mu, sigma) of (n-1, N), (mu, sigma) of (n, N-1)).
pub fn shifted_naive(pair: WishartPair) -> ((f64, f64), (f64, f64)) {
    let n = pair.rows() as f64;
    let m = pair.cols() as f64;
    (
        naive_from_plus(n - 0.5, m + 0.5),
        naive_from_plus(n + 0.5, m - 0.5),
    )
}

/// The refined (center, scale) pair and the mixing ratio gamma.
pub fn refined_sequences(pair: WishartPair) -> (CenteringScaling, f64) {
    let ((mu_a, sig_a), (mu_b, sig_b)) = shifted_naive(pair);
    let gamma = mu_a * sig_b.sqrt() / (mu_b * sig_a.sqrt());
    let sigma = (1.0 + gamma) / (1.0 / sig_a + gamma / sig_b);
    let mu = (1.0 / sig_a.sqrt() + 1.0 / sig_b.sqrt())
        / (1.0 / (mu_a * sig_a.sqrt()) + 1.0 / (mu_b * sig_b.sqrt()));
    (CenteringScaling { mu, sigma, kind: SeqKind::Refined }, gamma)
}

pub fn sequences_of_kind(pair: WishartPair, kind: SeqKind) -> CenteringScaling {
    match kind {
        SeqKind::Naive => naive_sequences(pair),
        SeqKind::Refined => refined_sequences(pair).0,
    }
}

pub fn lg_params(pair: WishartPair) -> LGParams {
    let kappa = pair.cols() as f64 + (pair.order_gap() + 1.0) / 2.0;
    let lambda = pair.order_gap() / 2.0;
    let omega = 2.0 * lambda / kappa;
    let disc = (4.0 - omega * omega).sqrt();
    let xi1 = 2.0 - disc;
    let xi2 = 2.0 + disc;
    let gap_alpha = 2.0 * disc;
    LGParams {
        kappa,
        lambda,
        omega,
        xi1,
        xi2,
        gap_alpha,
        beta_xi: xi2,
        eta: 1.0 / (2.0 * gap_alpha) - 1.0 / xi2,
    }
}

/// Exact normalization ratio r, computed in the log domain:
/// r^2 = 2 pi exp(-(n+1/2 + N+1/2)) (n+1/2)^{n+1/2} (N+1/2)^{N+1/2} / (N! n!).
pub fn r_n_exact(pair: WishartPair) -> Result<f64> {
    let np = pair.rows() as f64 + 0.5;
    let mp = pair.cols() as f64 + 0.5;
    let ln_r2 = (2.0 * std::f64::consts::PI).ln() - (np + mp)
        + np * np.ln()
        + mp * mp.ln()
        - crate::specfun::log_gamma(pair.rows() as f64 + 1.0)?
        - crate::specfun::log_gamma(pair.cols() as f64 + 1.0)?;
    Ok((0.5 * ln_r2).exp())
}

/// Second-order Stirling expansion of `r_n_exact`. The 1/n^2-coefficient is
/// -47/4608, from squaring the per-dimension factor 1 + 1/(24n) - 23/(1152 n^2).
pub fn r_n_expansion(pair: WishartPair) -> f64 {
    let n = pair.rows() as f64;
    let m = pair.cols() as f64;
    1.0 + (1.0 / n + 1.0 / m) / 48.0 + 1.0 / (2304.0 * n * m)
        - 47.0 / 4608.0 * (1.0 / (n * n) + 1.0 / (m * m))
}

/// The prefactor sqrt(a) sigma_side^{1/2} sigma~ / mu~ multiplying each
/// kernel profile; tends to 1 at rate 1/N for the refined sequences.
pub fn alpha_coefficient(pair: WishartPair, cs: &CenteringScaling, side: KernelSide) -> f64 {
    let ((_, sig_a), (_, sig_b)) = shifted_naive(pair);
    let sig = match side {
        KernelSide::Phi => sig_a,
        KernelSide::Psi => sig_b,
    };
    pair.sqrt_dim_product().sqrt() * sig.sqrt() * cs.sigma / cs.mu
}

/// First-order deviation terms (centering defect, scaling defect) of an
/// arbitrary candidate (center, scale) pair. Both vanish identically at the
/// refined sequences; admissible alternatives must keep them O(N^{-2/3}).
pub fn sequence_diagnostics(pair: WishartPair, mu_tilde: f64, sigma_tilde: f64) -> (f64, f64) {
    let ((mu_a, sig_a), (mu_b, sig_b)) = shifted_naive(pair);
    let sqrt_a = pair.sqrt_dim_product().sqrt();
    let c = sigma_tilde
        * sqrt_a
        * ((mu_tilde / mu_a - 1.0) / sig_a.sqrt() + (mu_tilde / mu_b - 1.0) / sig_b.sqrt());
    let s = sqrt_a
        * sigma_tilde
        * ((sig_a.sqrt() / mu_a) * (sigma_tilde / sig_a - 1.0)
            + (sig_b.sqrt() / mu_b) * (sigma_tilde / sig_b - 1.0));
    (c, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(n: u32, m: u32) -> WishartPair {
        WishartPair::new(n, m).unwrap()
    }

    #[test]
    fn naive_frozen_reference() {
        // frozen from arbitrary-precision evaluation of the closed forms
        let cs = naive_sequences(pair(10, 5));
        assert!((cs.mu - 31.19868415357066363167).abs() < 1e-13);
        assert!((cs.sigma - 5.040792884216774753129).abs() < 1e-14);
    }

    #[test]
    fn naive_cubic_identity() {
        // sigma^3 sqrt(n+ N+) = mu^2
        let p = pair(100, 37);
        let cs = naive_sequences(p);
        let np = 100.5f64;
        let mp = 37.5f64;
        let lhs = cs.sigma.powi(3) * (np * mp).sqrt();
        let rhs = cs.mu * cs.mu;
        assert!((lhs - rhs).abs() <= 1e-9 * rhs, "{lhs} vs {rhs}");
    }

    #[test]
    fn naive_symmetric_in_dimensions() {
        let (m1, s1) = naive_from_plus(10.5, 5.5);
        let (m2, s2) = naive_from_plus(5.5, 10.5);
        assert_eq!(m1, m2);
        assert_eq!(s1, s2);
    }

    #[test]
    fn refined_square_case_degenerates() {
        // n = N: both shifted pairs coincide (the formulas are symmetric)
        let (cs, gamma) = refined_sequences(pair(12, 12));
        assert!((gamma - 1.0).abs() < 1e-15);
        let ((mu_a, sig_a), _) = shifted_naive(pair(12, 12));
        assert!((cs.mu - mu_a).abs() < 1e-12);
        assert!((cs.sigma - sig_a).abs() < 1e-13);
    }

    #[test]
    fn refined_frozen_reference() {
        let (cs, gamma) = refined_sequences(pair(40, 10));
        assert!((cs.mu - 89.97446120497640384088).abs() < 1e-12);
        assert!((cs.sigma - 7.399076239400797158626).abs() < 1e-13);
        assert!((gamma - 1.017527902817875892935).abs() < 1e-14);
    }

    #[test]
    fn diagnostics_vanish_at_refined_roots() {
        let p = pair(40, 10);
        let (cs, _) = refined_sequences(p);
        let (c, s) = sequence_diagnostics(p, cs.mu, cs.sigma);
        assert!(c.abs() <= 1e-12, "c = {c:e}");
        assert!(s.abs() <= 1e-12, "s = {s:e}");
    }

    #[test]
    fn diagnostics_nonzero_off_the_roots() {
        let p = pair(40, 10);
        let (cs, _) = refined_sequences(p);
        let naive = naive_sequences(p);
        let (c, _) = sequence_diagnostics(p, naive.mu, naive.sigma);
        assert!(c.abs() > 1e-3, "naive centering defect should be visible: {c:e}");
        let (c, _) = sequence_diagnostics(p, cs.mu + 1.0, cs.sigma);
        assert!(c.abs() > 1e-3, "perturbed center must break the root: {c:e}");
    }

    #[test]
    fn diagnostics_vanish_over_random_pairs() {
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..100 {
            let m = (next() % 9_999) as u32 + 1;
            let n = m + (next() % 9_999) as u32;
            let p = pair(n, m);
            let (cs, _) = refined_sequences(p);
            let (c, s) = sequence_diagnostics(p, cs.mu, cs.sigma);
            assert!(c.abs() <= 1e-12, "({n},{m}): c = {c:e}");
            assert!(s.abs() <= 1e-12, "({n},{m}): s = {s:e}");
        }
    }

    #[test]
    fn sandwich_invariants_over_random_pairs() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..50 {
            let m = (next() % 10_000) as u32 + 1;
            let n = m + (next() % 10_000) as u32;
            let p = pair(n, m);
            let (cs, _) = refined_sequences(p);
            let ((mu_a, sig_a), (mu_b, sig_b)) = shifted_naive(p);
            let tol = 1e-12 * cs.mu;
            assert!(cs.mu >= mu_a.min(mu_b) - tol && cs.mu <= mu_a.max(mu_b) + tol);
            let tol = 1e-12 * cs.sigma;
            assert!(cs.sigma >= sig_a.min(sig_b) - tol && cs.sigma <= sig_a.max(sig_b) + tol);
        }
    }

    #[test]
    fn center_offset_bounded_over_wide_sweep() {
        // |mu~ - mu_{n-1,N}| stays bounded (well under 5) for N up to 1e5
        for (g, envelope) in [(1u32, 1e-9), (4, 1.0), (25, 3.0)] {
            let mut sup: f64 = 0.0;
            for nn in [10u32, 100, 1_000, 10_000, 100_000] {
                let p = pair(g * nn, nn);
                let (cs, _) = refined_sequences(p);
                let ((mu_a, _), _) = shifted_naive(p);
                sup = sup.max((cs.mu - mu_a).abs());
            }
            assert!(sup <= envelope, "gamma={g}: sup = {sup}");
            assert!(sup <= 5.0);
        }
    }

    #[test]
    fn scale_ratio_rate_bounded_over_wide_sweep() {
        // N |sigma~/sigma_{n-1,N} - 1| bounded at each gamma
        for g in [1u32, 4, 25] {
            let mut sup: f64 = 0.0;
            for nn in [10u32, 100, 1_000, 10_000, 100_000] {
                let p = pair(g * nn, nn);
                let (cs, _) = refined_sequences(p);
                let ((_, sig_a), _) = shifted_naive(p);
                sup = sup.max(nn as f64 * (cs.sigma / sig_a - 1.0).abs());
            }
            assert!(sup <= 1.0, "gamma={g}: sup = {sup}");
        }
    }

    #[test]
    fn lg_params_square_and_rectangular() {
        let lp = lg_params(pair(12, 12));
        assert_eq!(lp.omega, 0.0);
        assert_eq!(lp.xi1, 0.0);
        assert_eq!(lp.xi2, 4.0);
        assert_eq!(lp.gap_alpha, 4.0);
        // n = 3N: omega = 4N/(4N+1) < 1 for all N
        for nn in [1u32, 2, 7, 100, 10_000] {
            let lp = lg_params(pair(3 * nn, nn));
            let expect = 2.0 * (2.0 * nn as f64) / (4.0 * nn as f64 + 1.0);
            assert!((lp.omega - expect).abs() < 1e-15);
            assert!(lp.omega < 1.0);
        }
    }

    #[test]
    fn lg_params_invariants() {
        for (n, m) in [(50u32, 20u32), (13, 13), (1000, 10)] {
            let p = pair(n, m);
            let lp = lg_params(p);
            assert!((lp.xi1 * lp.xi2 - lp.omega * lp.omega).abs() < 1e-12);
            assert!((lp.xi1 + lp.xi2 - 4.0).abs() < 1e-14);
            let mu = naive_sequences(p).mu;
            assert!(
                ((lp.kappa * lp.xi2 - mu) / mu).abs() <= 1e-12,
                "kappa*xi2 = {} vs mu = {mu}",
                lp.kappa * lp.xi2
            );
        }
    }

    #[test]
    fn r_n_first_order_and_expansion() {
        let p = pair(10, 10);
        let r = r_n_exact(p).unwrap();
        assert!((r - (1.0 + 2.0 / 480.0)).abs() <= 0.01);
        let p = pair(100, 100);
        let r = r_n_exact(p).unwrap();
        let e = r_n_expansion(p);
        assert!((r - e).abs() <= 1e-6, "diff = {:e}", r - e);
    }

    #[test]
    fn r_n_residual_decreases_as_n_doubles() {
        let mut prev = f64::INFINITY;
        let mut nn = 10u32;
        while nn <= 320 {
            let res = (r_n_exact(pair(nn, nn)).unwrap() - 1.0).abs();
            assert!(res < prev, "residual must shrink at N={nn}");
            prev = res;
            nn *= 2;
        }
    }

    #[test]
    fn alpha_coefficient_properties() {
        // near 1, symmetric for square pairs, and 1 + O(1/N) along the sweep
        let p = pair(40, 10);
        let (cs, _) = refined_sequences(p);
        let a = alpha_coefficient(p, &cs, KernelSide::Phi);
        assert!(a > 0.9 && a < 1.1, "alpha = {a}");
        let p = pair(12, 12);
        let (cs, _) = refined_sequences(p);
        assert_eq!(
            alpha_coefficient(p, &cs, KernelSide::Phi),
            alpha_coefficient(p, &cs, KernelSide::Psi)
        );
        let mut sup: f64 = 0.0;
        for nn in [10u32, 40, 160] {
            let p = pair(nn, nn);
            let (cs, _) = refined_sequences(p);
            let a = alpha_coefficient(p, &cs, KernelSide::Phi);
            sup = sup.max(nn as f64 * (a - 1.0).abs());
        }
        assert!(sup <= 1.0, "N|alpha-1| sup = {sup}");
    }
}
