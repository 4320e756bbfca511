//! Schwarz-Christoffel maps from the unit disk onto regular polygons.

use super::hypergeometric::hyp2f1;
use crate::error::{Error, Result};
use crate::C64;

/// `∫₀ᶻ (1 − wⁿ)^{−a} dw = z · ₂F₁(1/n, a; 1 + 1/n; zⁿ)` for `|z| ≤ 1`.
pub fn polygon_integral(z: C64, n: u32, a: f64) -> Result<C64> {
    if z == C64::new(0.0, 0.0) {
        return Ok(z);
    }
    let k = 1.0 / n as f64;
    Ok(z * hyp2f1(k, a, 1.0 + k, z.powu(n))?)
}

/// `sc_n(z) = ∫₀ᶻ (1 − wⁿ)^{−2/n} dw`, the conformal map of the unit disk
/// onto a regular `n`-gon with vertices at the images of the `n`-th roots of
/// unity.
pub fn schwarz_christoffel(z: C64, n: u32) -> Result<C64> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("sc_n needs n ≥ 3, got {n}")));
    }
    polygon_integral(z, n, 2.0 / n as f64)
}

/// Inverse of [`schwarz_christoffel`] on the polygon interior, by Newton
/// iteration seeded at the identity.
pub fn schwarz_christoffel_inverse(w: C64, n: u32) -> Result<C64> {
    let a = 2.0 / n as f64;
    let mut z = w;
    if z.norm() >= 1.0 {
        z = z / z.norm() * 0.99;
    }
    for _ in 0..50 {
        let f = schwarz_christoffel(z, n)? - w;
        let df = (1.0 - z.powu(n)).powf(-a);
        let mut step = f / df;
        // damp steps that would leave the disk
        while (z - step).norm() >= 1.0 {
            step *= 0.5;
            if step.norm() < 1e-300 {
                return Err(Error::NoConvergence(w));
            }
        }
        z -= step;
        if step.norm() < 1e-12 {
            return Ok(z);
        }
    }
    Err(Error::NoConvergence(w))
}
