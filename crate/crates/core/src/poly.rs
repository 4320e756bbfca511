//! Dense complex polynomials, coefficients in descending degree.

use crate::geometry::ProjectivePoint;
use crate::C64;

pub fn derivative(p: &[C64]) -> Vec<C64> {
    let n = p.len().saturating_sub(1);
    p[..n].iter().enumerate().map(|(i, &c)| c * (n - i) as f64).collect()
}

pub fn multiply(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `a − b`, aligned at the constant term.
pub fn subtract(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    let pad = |p: &[C64]| {
        let mut v = vec![C64::new(0.0, 0.0); n - p.len()];
        v.extend_from_slice(p);
        v
    };
    pad(a).iter().zip(pad(b)).map(|(x, y)| x - y).collect()
}

pub fn eval(p: &[C64], z: C64) -> C64 {
    p.iter().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Roots of the binary form with these coefficients, as points of `Ĉ`.
///
/// A form of formal degree `n` whose leading `k` coefficients vanish has a
/// `k`-fold root at `∞`. Finite roots come from Aberth iteration.
pub fn roots(p: &[C64]) -> Vec<ProjectivePoint> {
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let lead = p.iter().position(|c| c.norm() > 1e-13 * scale).unwrap_or(p.len() - 1);
    let mut out = vec![ProjectivePoint::INFINITY; lead];
    let q: Vec<C64> = p[lead..].iter().map(|c| c / p[lead]).collect();
    out.extend(aberth(&q).into_iter().map(ProjectivePoint::finite));
    out
}

/// Finite roots of a monic polynomial.
fn aberth(p: &[C64]) -> Vec<C64> {
    let n = p.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let dp = derivative(p);
    // Cauchy bound for the initial circle
    let radius = 1.0 + p[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(radius * 0.5 + 0.1, std::f64::consts::TAU * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for k in 0..n {
            let f = eval(p, z[k]);
            if f.norm() == 0.0 {
                continue;
            }
            let ratio = f / eval(&dp, z[k]);
            let repulsion: C64 = (0..n).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                moved = moved.max(step.norm() / z[k].norm().max(1.0));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}
