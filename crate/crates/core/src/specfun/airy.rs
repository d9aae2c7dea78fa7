//! Airy Ai and Ai' on the real line.
//!
//! Three regimes:
//!  * x > 9: Poincare asymptotic expansion in zeta = (2/3) x^{3/2},
//!    truncated at the smallest term (below 1e-15 relative there).
//!  * -16 <= x <= 9: evaluation of the local Taylor series of the Airy ODE
//!    y'' = x y around the nearest entry of an anchor table. Anchors sit on
//!    a quarter-unit grid and are generated once by marching the same series
//!    down from x = 9, the direction in which Ai is the growing solution, so
//!    the march is stable and keeps relative accuracy.
//!  * x < -16: oscillatory asymptotic expansion (outside the accuracy window
//!    the rest of the crate relies on, but still ~1e-13 there).
//!
//! The anchor coefficients are stored and summed in double-double precision;
//! returned values are then correctly rounded doubles, which keeps
//! finite-difference probes of the ODE residual down at the level of the
//! difference formula's own truncation error.

use std::sync::OnceLock;

const X_TOP: f64 = 9.0;
const STEP: f64 = 0.25;
const N_ANCHORS: usize = 101; // covers [9, -16]
const TAYLOR_TERMS: usize = 32;
const X_BOTTOM: f64 = X_TOP - STEP * (N_ANCHORS as f64 - 1.0);

/// Unevaluated double-double value hi + lo with |lo| <= ulp(hi)/2.
#[derive(Clone, Copy, Debug, Default)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }

    fn add(self, other: Dd) -> Dd {
        // two_sum of the high parts, then fold both low parts back in
        let s = self.hi + other.hi;
        let bb = s - self.hi;
        let err = (self.hi - (s - bb)) + (other.hi - bb);
        let lo = err + self.lo + other.lo;
        let hi = s + lo;
        Dd { hi, lo: lo - (hi - s) }
    }

    fn mul_f64(self, b: f64) -> Dd {
        let p = self.hi * b;
        let e = self.hi.mul_add(b, -p);
        let lo = e + self.lo * b;
        let hi = p + lo;
        Dd { hi, lo: lo - (hi - p) }
    }

    fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let p = q1 * b;
        let e = q1.mul_add(b, -p); // p + e = q1 * b exactly
        let r = (self.hi - p) - e + self.lo;
        let q2 = r / b;
        let hi = q1 + q2;
        Dd { hi, lo: q2 - (hi - q1) }
    }
}

/// Taylor coefficients of a solution of y'' = x y around anchor `a`.
fn ode_series(a: f64, y: Dd, dy: Dd) -> [Dd; TAYLOR_TERMS + 2] {
    let mut c = [Dd::default(); TAYLOR_TERMS + 2];
    c[0] = y;
    c[1] = dy;
    for k in 0..TAYLOR_TERMS {
        let prev = if k == 0 { Dd::default() } else { c[k - 1] };
        c[k + 2] = c[k].mul_add_dd(a, prev).div_f64(((k + 1) * (k + 2)) as f64);
    }
    c
}

impl Dd {
    /// self * b + other, in double-double.
    fn mul_add_dd(self, b: f64, other: Dd) -> Dd {
        self.mul_f64(b).add(other)
    }
}

fn horner(c: &[Dd], h: f64) -> Dd {
    let mut v = Dd::default();
    for k in (0..c.len()).rev() {
        v = v.mul_add_dd(h, c[k]);
    }
    v
}

fn horner_derivative(c: &[Dd], h: f64) -> Dd {
    let mut v = Dd::default();
    for k in (1..c.len()).rev() {
        v = v.mul_add_dd(h, c[k].mul_f64(k as f64));
    }
    v
}

/// Asymptotic series for x > 0; returns (Ai, Ai').
fn asymptotic_pos(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let mut u = 1.0f64; // u_k
    let mut su = 1.0;
    let mut sv = 1.0;
    let mut sign = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        let kf = k as f64;
        u *= (6.0 * kf + 1.0) * (6.0 * kf + 5.0) / (72.0 * (kf + 1.0));
        let t = u / zeta.powi(k as i32 + 1);
        if t.abs() >= prev {
            break; // past the optimal truncation point
        }
        prev = t.abs();
        sign = -sign;
        su += sign * t;
        let v = u * (6.0 * (kf + 1.0) + 1.0) / (1.0 - 6.0 * (kf + 1.0));
        sv += sign * (v / u) * t;
        if t.abs() < 1e-18 {
            break;
        }
    }
    let pre = (-zeta).exp() / (2.0 * std::f64::consts::PI.sqrt());
    let ai = pre * su / x.powf(0.25);
    let aip = -pre * x.powf(0.25) * sv;
    (ai, aip)
}

/// Oscillatory asymptotic series for x < 0 with |x| large; returns (Ai, Ai').
fn asymptotic_neg(x: f64) -> (f64, f64) {
    let z = -x;
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let mut u = vec![1.0f64];
    let mut v = vec![1.0f64];
    for k in 0..24usize {
        let kf = k as f64;
        let next = u[k] * (6.0 * kf + 1.0) * (6.0 * kf + 5.0) / (72.0 * (kf + 1.0));
        u.push(next);
        v.push(next * (6.0 * (kf + 1.0) + 1.0) / (1.0 - 6.0 * (kf + 1.0)));
    }
    let (mut ue, mut uo, mut ve, mut vo) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..12usize {
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        ue += s * u[2 * k] / zeta.powi(2 * k as i32);
        uo += s * u[2 * k + 1] / zeta.powi(2 * k as i32 + 1);
        ve += s * v[2 * k] / zeta.powi(2 * k as i32);
        vo += s * v[2 * k + 1] / zeta.powi(2 * k as i32 + 1);
    }
    let phase = zeta - std::f64::consts::FRAC_PI_4;
    let rt_pi = std::f64::consts::PI.sqrt();
    let ai = (phase.cos() * ue + phase.sin() * uo) / (rt_pi * z.powf(0.25));
    let aip = (phase.sin() * ve - phase.cos() * vo) * z.powf(0.25) / rt_pi;
    (ai, aip)
}

/// Per-anchor Taylor coefficient tables, built once by the downward march.
fn anchors() -> &'static Vec<[Dd; TAYLOR_TERMS + 2]> {
    static TABLE: OnceLock<Vec<[Dd; TAYLOR_TERMS + 2]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(N_ANCHORS);
        let (ai0, aip0) = asymptotic_pos(X_TOP);
        let mut y = Dd::from(ai0);
        let mut dy = Dd::from(aip0);
        for k in 0..N_ANCHORS {
            let a = X_TOP - STEP * k as f64;
            let c = ode_series(a, y, dy);
            y = horner(&c, -STEP);
            dy = horner_derivative(&c, -STEP);
            t.push(c);
        }
        t
    })
}

fn from_anchor(x: f64) -> (Dd, Dd) {
    let k = (((X_TOP - x) / STEP).round() as usize).min(N_ANCHORS - 1);
    let a = X_TOP - STEP * k as f64;
    let c = &anchors()[k];
    let h = x - a; // exact: x and a share exponent range
    (horner(c, h), horner_derivative(c, h))
}

/// Airy function of the first kind.
pub fn airy_ai(x: f64) -> f64 {
    if x > X_TOP {
        asymptotic_pos(x).0
    } else if x >= X_BOTTOM {
        from_anchor(x).0.value()
    } else {
        asymptotic_neg(x).0
    }
}

/// Derivative of the Airy function of the first kind.
pub fn airy_ai_prime(x: f64) -> f64 {
    if x > X_TOP {
        asymptotic_pos(x).1
    } else if x >= X_BOTTOM {
        from_anchor(x).1.value()
    } else {
        asymptotic_neg(x).1
    }
}
