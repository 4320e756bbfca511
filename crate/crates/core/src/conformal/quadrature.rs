//! Double-exponential (tanh-sinh) quadrature on `[0, 1]`.
//!
//! Used where integrands carry algebraic endpoint singularities such as
//! `t^{b−1}(1 − t)^{c−b−1}`; the substitution flattens them out.

use crate::C64;
use std::f64::consts::FRAC_PI_2;

/// Integrates `f` over `[0, 1]`. The integrand receives both `t` and `1 − t`,
/// each computed without cancellation.
pub fn tanh_sinh<F>(f: F, tol: f64) -> Option<C64>
where
    F: Fn(f64, f64) -> C64,
{
    const S_MAX: f64 = 6.5;
    let node = |s: f64| -> Option<(f64, f64, f64)> {
        let g = FRAC_PI_2 * s.sinh();
        let t = 1.0 / (1.0 + (-2.0 * g).exp());
        let tc = 1.0 / (1.0 + (2.0 * g).exp());
        let e = (-2.0 * g.abs()).exp();
        let weight = FRAC_PI_2 * s.cosh() * e / ((1.0 + e) * (1.0 + e)) * 2.0;
        (t > 0.0 && tc > 0.0 && weight > 0.0).then_some((t, tc, weight))
    };

    let mut h = 0.5;
    let mut sum = C64::new(0.0, 0.0);
    // level 0: every multiple of h
    let mut k = 0i64;
    loop {
        let s = k as f64 * h;
        if s > S_MAX {
            break;
        }
        for s in if k == 0 { vec![0.0] } else { vec![s, -s] } {
            if let Some((t, tc, w)) = node(s) {
                sum += f(t, tc) * w;
            }
        }
        k += 1;
    }
    let mut estimate = sum * h;

    for _ in 0..10 {
        h *= 0.5;
        // new nodes are the odd multiples of the halved step
        let mut k = 1i64;
        loop {
            let s = k as f64 * h;
            if s > S_MAX {
                break;
            }
            for s in [s, -s] {
                if let Some((t, tc, w)) = node(s) {
                    sum += f(t, tc) * w;
                }
            }
            k += 2;
        }
        let next = sum * h;
        let done = (next - estimate).norm() <= tol * next.norm().max(1e-300);
        estimate = next;
        if done {
            return estimate.is_finite().then_some(estimate);
        }
    }
    None
}
