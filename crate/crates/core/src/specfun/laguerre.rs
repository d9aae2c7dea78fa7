//! Orthonormal weighted Laguerre functions and the edge functions built
//! from them.
//!
//! The workhorse is `laguerre_phi`, the L^2(0, inf)-orthonormal function
//!   phi_k(x; a) = sqrt(k! / Gamma(k + a + 1)) x^{a/2} e^{-x/2} L_k^a(x).
//! The weight and normalization are folded into the three-term recurrence
//! seed, which is computed in the log domain and carried with an explicit
//! power-of-two scale, so neither the huge raw polynomial values nor the
//! tiny weight can overflow or underflow for degrees and arguments up to
//! several thousand.

use crate::error::{Error, Result};
use crate::specfun::gamma::log_gamma;

/// Degree and order of an orthonormal weighted Laguerre function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaguerreParams {
    pub degree: u32,
    /// Laguerre order; must be > -1 for direct evaluation.
    pub order: f64,
}

impl LaguerreParams {
    pub fn new(degree: u32, order: f64) -> Result<Self> {
        if !(order > -1.0) {
            return Err(Error::Domain(format!(
                "Laguerre order {order} must be > -1 (order -1 is handled by the matched-pair identity)"
            )));
        }
        Ok(Self { degree, order })
    }
}

/// Matrix dimensions (rows x cols) of the Gaussian data matrix, canonicalized
/// to rows >= cols; the largest eigenvalue of X*X is invariant under the swap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WishartPair {
    rows: u32,
    cols: u32,
}

impl WishartPair {
    /// Swaps the arguments if needed so that rows >= cols >= 1.
    pub fn new(n: u32, m: u32) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Domain("WishartPair: dimensions must be >= 1".into()));
        }
        let (rows, cols) = if n >= m { (n, m) } else { (m, n) };
        Ok(Self { rows, cols })
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    /// rows - cols >= 0.
    pub fn order_gap(&self) -> f64 {
        (self.rows - self.cols) as f64
    }

    /// sqrt(rows * cols).
    pub fn sqrt_dim_product(&self) -> f64 {
        (self.rows as f64 * self.cols as f64).sqrt()
    }
}

/// Mantissa-and-exponent pair m * 2^e used inside the scaled recurrence.
#[derive(Clone, Copy)]
struct Scaled {
    m: f64,
    e: i64,
}

impl Scaled {
    fn value(self) -> f64 {
        if self.m == 0.0 || self.e < -1400 {
            return 0.0;
        }
        if self.e > 1400 {
            return f64::INFINITY * self.m.signum();
        }
        let half = (self.e / 2) as i32;
        self.m * 2f64.powi(half) * 2f64.powi(self.e as i32 - half)
    }
}

fn seed_scaled(order: f64, x: f64) -> Result<Scaled> {
    let ln_phi0 = 0.5 * order * x.ln() - 0.5 * x - 0.5 * log_gamma(order + 1.0)?;
    let e = (ln_phi0 / std::f64::consts::LN_2).floor();
    Ok(Scaled {
        m: (ln_phi0 - e * std::f64::consts::LN_2).exp(),
        e: e as i64,
    })
}

/// Runs the orthonormal recurrence, invoking `visit(k, phi_k)` for each degree
/// 0..=k_max with the unscaled value (0.0 once genuinely below f64 range).
fn phi_recurrence(
    k_max: u32,
    order: f64,
    x: f64,
    mut visit: impl FnMut(u32, f64),
) -> Result<()> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("laguerre_phi: x = {x} must be > 0")));
    }
    if !(order > -1.0) {
        return Err(Error::Domain(format!("laguerre_phi: order {order} must be > -1")));
    }
    let seed = seed_scaled(order, x)?;
    let mut prev = Scaled { m: 0.0, e: seed.e };
    let mut cur = seed;
    visit(0, cur.value());
    for k in 0..k_max {
        let kf = k as f64;
        let c1 = (2.0 * kf + 1.0 + order - x) / ((kf + 1.0) * (kf + 1.0 + order)).sqrt();
        let c2 = (kf * (kf + order) / ((kf + 1.0) * (kf + 1.0 + order))).sqrt();
        let next = Scaled {
            m: c1 * cur.m - c2 * prev.m,
            e: cur.e,
        };
        prev = cur;
        cur = next;
        // renormalize the shared scale when the mantissas drift
        let mag = cur.m.abs().max(prev.m.abs());
        if mag > 1e150 {
            cur.m *= 2f64.powi(-500);
            prev.m *= 2f64.powi(-500);
            cur.e += 500;
            prev.e += 500;
        } else if mag != 0.0 && mag < 1e-150 {
            cur.m *= 2f64.powi(500);
            prev.m *= 2f64.powi(500);
            cur.e -= 500;
            prev.e -= 500;
        }
        visit(k + 1, cur.value());
    }
    Ok(())
}

/// phi_k(x; a), the orthonormal weighted Laguerre function.
pub fn laguerre_phi(params: LaguerreParams, x: f64) -> Result<f64> {
    let mut out = 0.0;
    phi_recurrence(params.degree, params.order, x, |k, v| {
        if k == params.degree {
            out = v;
        }
    })?;
    Ok(out)
}

/// All of phi_0 .. phi_{k_max} at one argument (used by the projection kernel).
pub fn laguerre_phi_sequence(k_max: u32, order: f64, x: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; k_max as usize + 1];
    phi_recurrence(k_max, order, x, |k, v| out[k as usize] = v)?;
    Ok(out)
}

fn sign_pow(n: u32) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The phi-side kernel profile of the pair,
/// (-1)^N sqrt(a/2) phi_N(x; gap - 1) x^{-1/2}; coincides with the psi side
/// when rows = cols (where order gap - 1 would hit the excluded order -1).
pub fn kernel_phi(pair: WishartPair, x: f64) -> Result<f64> {
    if pair.order_gap() == 0.0 {
        return kernel_psi(pair, x);
    }
    let p = LaguerreParams::new(pair.cols(), pair.order_gap() - 1.0)?;
    Ok(sign_pow(pair.cols()) * (pair.sqrt_dim_product() / 2.0).sqrt() * laguerre_phi(p, x)?
        / x.sqrt())
}

/// The psi-side kernel profile of the pair,
/// (-1)^{N-1} sqrt(a/2) phi_{N-1}(x; gap + 1) x^{-1/2}.
pub fn kernel_psi(pair: WishartPair, x: f64) -> Result<f64> {
    let p = LaguerreParams::new(pair.cols() - 1, pair.order_gap() + 1.0)?;
    Ok(sign_pow(pair.cols() - 1) * (pair.sqrt_dim_product() / 2.0).sqrt() * laguerre_phi(p, x)?
        / x.sqrt())
}

/// The normalized weighted Laguerre function of the pair scaled so that it
/// approaches Airy at the soft edge:
/// (-1)^N sigma^{-1/2} sqrt(N!/n!) z^{(gap+1)/2} e^{-z/2} L_N^{gap}(z),
/// evaluated as (-1)^N sigma^{-1/2} sqrt(z) phi_N(z; gap).
pub fn scaled_laguerre(pair: WishartPair, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!(
            "scaled_laguerre: z = {z} must be > 0 (eigenvalue support)"
        )));
    }
    let sigma = crate::sequences::naive_sequences(pair).sigma;
    let p = LaguerreParams::new(pair.cols(), pair.order_gap())?;
    Ok(sign_pow(pair.cols()) * z.sqrt() * laguerre_phi(p, z)? / sigma.sqrt())
}
