//! Gauss hypergeometric function `₂F₁(a, b; c; z)` for real parameters.
//!
//! Evaluation strategy, by region of `z`:
//!
//! | region | method |
//! |---|---|
//! | `|z| ≤ 0.95` | power series |
//! | `|1 − z| ≤ 0.95` | connection formula in `1 − z` (needs `c − a − b ∉ ℤ`) |
//! | `|z/(z − 1)| ≤ 0.95` | Pfaff transformation |
//! | remaining `|z| ≤ 1` | Euler integral by tanh-sinh quadrature |
//!
//! Outside the closed unit disk no continuation is attempted.

use super::quadrature::tanh_sinh;
use crate::error::{Error, Result};
use crate::C64;
use statrs::function::gamma::gamma;

const SERIES_RADIUS: f64 = 0.95;
const MAX_TERMS: usize = 20_000;

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

/// Plain power series `Σ (a)_k (b)_k / ((c)_k k!) z^k`.
pub fn hyp2f1_series(a: f64, b: f64, c: f64, z: C64) -> Result<C64> {
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    let mut quiet = 0;
    for k in 0..MAX_TERMS {
        let k = k as f64;
        term *= z * ((a + k) * (b + k) / ((c + k) * (k + 1.0)));
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            quiet += 1;
            if quiet >= 2 {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
        if term == C64::new(0.0, 0.0) {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence(z))
}

/// `₂F₁(a, b; c; z)` for `|z| ≤ 1`.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: C64) -> Result<C64> {
    if is_nonpositive_integer(c) {
        return Err(Error::InvalidParameter(format!("c = {c} is a non-positive integer")));
    }
    if z == C64::new(0.0, 0.0) {
        return Ok(C64::new(1.0, 0.0));
    }
    if z.norm() <= SERIES_RADIUS {
        return hyp2f1_series(a, b, c, z);
    }
    if z.norm() > 1.0 + 1e-12 {
        return Err(Error::NoConvergence(z));
    }

    let s = c - a - b;
    let w = C64::new(1.0, 0.0) - z;
    if w.norm() <= SERIES_RADIUS && s.fract() != 0.0 {
        // DLMF 15.8.4
        let g1 = gamma(c) * gamma(s) * rgamma(c - a) * rgamma(c - b);
        let g2 = gamma(c) * gamma(-s) * rgamma(a) * rgamma(b);
        let mut out = C64::new(0.0, 0.0);
        if g1 != 0.0 {
            out += hyp2f1_series(a, b, 1.0 - s, w)? * g1;
        }
        if g2 != 0.0 && w != C64::new(0.0, 0.0) {
            out += w.powf(s) * hyp2f1_series(c - a, c - b, s + 1.0, w)? * g2;
        }
        return Ok(out);
    }

    let pfaff = z / (z - 1.0);
    if pfaff.norm() <= SERIES_RADIUS {
        return Ok(w.powf(-a) * hyp2f1_series(a, c - b, c, pfaff)?);
    }

    euler_integral(a, b, c, z)
}

/// `Γ(c)/(Γ(b)Γ(c−b)) ∫₀¹ t^{b−1}(1−t)^{c−b−1}(1−zt)^{−a} dt`, needs `c > b > 0`
/// (or the same with `a` and `b` exchanged).
fn euler_integral(a: f64, b: f64, c: f64, z: C64) -> Result<C64> {
    let (a, b) = if c > b && b > 0.0 {
        (a, b)
    } else if c > a && a > 0.0 {
        (b, a)
    } else {
        return Err(Error::NoConvergence(z));
    };
    let prefactor = gamma(c) * rgamma(b) * rgamma(c - b);
    let integrand = |t: f64, tc: f64| {
        let base = t.powf(b - 1.0) * tc.powf(c - b - 1.0);
        (C64::new(1.0, 0.0) - z * t).powf(-a) * base
    };
    tanh_sinh(integrand, 1e-14)
        .map(|v| v * prefactor)
        .ok_or(Error::NoConvergence(z))
}
