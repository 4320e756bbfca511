//! Weierstrass ℘ for the square lattice `Z[i]` and the hexagonal lattice
//! `Z[ω]`, `ω = e^{iπ/3}`, evaluated through Jacobi theta functions.
//!
//! Periods are normalized to `1` and `τ`. With nome `q = e^{iπτ}` and
//! `v = πz`,
//!
//! ```text
//! ℘(z) = e₃ + (π θ₂ θ₃ θ₄(v) / θ₁(v))²
//! ```
//!
//! where `θ₂, θ₃` are theta constants. Values are returned as projective
//! pairs so the poles at lattice points come out as `∞` with no branching.

use crate::error::{Error, Result};
use crate::geometry::ProjectivePoint;
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: C64 = C64::new(0.0, 1.0);

/// The two lattices with extra symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Square,
    Hexagonal,
}

/// A period lattice `Z + τZ` together with its precomputed theta data.
#[derive(Debug, Clone)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub tau: C64,
    /// `q^{(n+1/2)²}` for `n = 0, 1, …`
    q_half: Vec<C64>,
    /// `q^{n²}` for `n = 0, 1, …`
    q_int: Vec<C64>,
    theta2: C64,
    theta3: C64,
    /// `e₁ = ℘(1/2)`, `e₂ = ℘((1+τ)/2)`, `e₃ = ℘(τ/2)`
    roots: [C64; 3],
}

impl LatticeSpec {
    pub fn new(kind: LatticeKind) -> Self {
        let tau = match kind {
            LatticeKind::Square => I,
            LatticeKind::Hexagonal => C64::from_polar(1.0, PI / 3.0),
        };
        let nome = |e: f64| (I * PI * tau * e).exp();
        let mut q_half = Vec::new();
        let mut q_int = vec![C64::new(1.0, 0.0)];
        for n in 0..40 {
            let h = nome((n as f64 + 0.5).powi(2));
            let k = nome(((n + 1) as f64).powi(2));
            q_half.push(h);
            q_int.push(k);
            if h.norm() < 1e-40 && k.norm() < 1e-40 {
                break;
            }
        }
        let theta2 = q_half.iter().map(|q| 2.0 * q).sum::<C64>();
        let theta3 = C64::new(1.0, 0.0) + q_int[1..].iter().map(|q| 2.0 * q).sum::<C64>();
        let theta4 = C64::new(1.0, 0.0)
            + q_int[1..]
                .iter()
                .enumerate()
                .map(|(k, q)| if k % 2 == 0 { -2.0 * q } else { 2.0 * q })
                .sum::<C64>();
        let t2 = theta2.powi(4);
        let t4 = theta4.powi(4);
        let e1 = PI * PI / 3.0 * (t2 + 2.0 * t4);
        let e3 = -PI * PI / 3.0 * (2.0 * t2 + t4);
        let e2 = -e1 - e3;
        Self { kind, tau, q_half, q_int, theta2, theta3, roots: [e1, e2, e3] }
    }

    pub fn square() -> Self {
        Self::new(LatticeKind::Square)
    }

    pub fn hexagonal() -> Self {
        Self::new(LatticeKind::Hexagonal)
    }

    /// `[e₁, e₂, e₃]`, the values of ℘ at `1/2`, `(1+τ)/2`, `τ/2`.
    pub fn roots(&self) -> [C64; 3] {
        self.roots
    }

    /// The half periods matching [`roots`](Self::roots).
    pub fn half_periods(&self) -> [C64; 3] {
        [C64::new(0.5, 0.0), (1.0 + self.tau) / 2.0, self.tau / 2.0]
    }

    /// `(g₂, g₃)` from the roots: `g₂ = 2Σeₖ²`, `g₃ = 4e₁e₂e₃`.
    pub fn invariants_from_roots(&self) -> (C64, C64) {
        let [e1, e2, e3] = self.roots;
        (2.0 * (e1 * e1 + e2 * e2 + e3 * e3), 4.0 * e1 * e2 * e3)
    }

    /// Lattice coordinates `(x, y)` with `z = x + yτ`.
    pub fn coordinates(&self, z: C64) -> (f64, f64) {
        let y = z.im / self.tau.im;
        (z.re - y * self.tau.re, y)
    }

    /// Representative of `z` modulo the lattice with both coordinates in `[-1/2, 1/2]`.
    pub fn reduce(&self, z: C64) -> C64 {
        let (x, y) = self.coordinates(z);
        z - x.round() - y.round() * self.tau
    }

    /// True when `m` lies in the multiplier ring (`Z[i]` or `Z[ω]`).
    pub fn is_multiplier(&self, m: C64) -> bool {
        let (x, y) = self.coordinates(m);
        m.norm() > 0.5 && (x - x.round()).abs() < 1e-9 && (y - y.round()).abs() < 1e-9
    }

    /// θ₁, θ₁′, θ₄, θ₄′ at `v`.
    fn theta14(&self, v: C64) -> [C64; 4] {
        let mut t1 = C64::new(0.0, 0.0);
        let mut d1 = C64::new(0.0, 0.0);
        for (n, q) in self.q_half.iter().enumerate() {
            let k = (2 * n + 1) as f64;
            let s = if n % 2 == 0 { 2.0 } else { -2.0 };
            let (sin, cos) = ((k * v).sin(), (k * v).cos());
            let term = q * s;
            t1 += term * sin;
            d1 += term * k * cos;
            if (term * sin).norm() < 1e-18 * t1.norm() && n > 2 {
                break;
            }
        }
        let mut t4 = C64::new(1.0, 0.0);
        let mut d4 = C64::new(0.0, 0.0);
        for (n, q) in self.q_int.iter().enumerate().skip(1) {
            let k = (2 * n) as f64;
            let s = if n % 2 == 0 { 2.0 } else { -2.0 };
            let term = q * s;
            let cos = (k * v).cos();
            t4 += term * cos;
            d4 -= term * k * (k * v).sin();
            if (term * cos).norm() < 1e-18 * t4.norm() && n > 2 {
                break;
            }
        }
        [t1, d1, t4, d4]
    }

    /// ℘(z), with the double poles at lattice points returned as `∞`.
    pub fn p(&self, z: C64) -> ProjectivePoint {
        let v = PI * self.reduce(z);
        let [t1, _, t4, _] = self.theta14(v);
        let a = PI * self.theta2 * self.theta3 * t4;
        let den = t1 * t1;
        ProjectivePoint::new(self.roots[2] * den + a * a, den)
    }

    /// ℘′(z), with triple poles at lattice points returned as `∞`.
    pub fn p_prime(&self, z: C64) -> ProjectivePoint {
        let v = PI * self.reduce(z);
        let [t1, d1, t4, d4] = self.theta14(v);
        let k = 2.0 * PI.powi(3) * (self.theta2 * self.theta3).powi(2);
        ProjectivePoint::new(k * t4 * (d4 * t1 - t4 * d1), t1 * t1 * t1)
    }

    /// Some `z` with `℘(z) = u`. The result is determined up to sign and
    /// lattice translation.
    ///
    /// Large values are inverted through the integral
    /// `z = e₁^{−1/2} ∫₀ᵗ (1 − wⁿ)^{−1/2} dw`, `t = (e₁/u)^{1/2}`, with `n = 4`
    /// (square) or `n = 6` (hexagonal); small values are first moved out by
    /// a half-period translation. A few Newton steps polish the result.
    pub fn p_inverse(&self, u: ProjectivePoint) -> Result<C64> {
        let half = self.half_periods();
        // candidates: u itself and ℘(ζ + ωₖ), an involution of u for each k
        let mut best = (u, C64::new(0.0, 0.0));
        let size = |p: &ProjectivePoint| match p.affine() {
            Some(z) if !p.is_infinite() => z.norm(),
            _ => f64::INFINITY,
        };
        for (k, &h) in half.iter().enumerate() {
            let ek = self.roots[k];
            let prod = (ek - self.roots[(k + 1) % 3]) * (ek - self.roots[(k + 2) % 3]);
            // (u − eₖ) ↦ prod / (u − eₖ), then + eₖ
            let w = ProjectivePoint::new(u.z1 - ek * u.z2, u.z2);
            let moved = ProjectivePoint::new(ek * w.z1 + prod * w.z2, w.z1);
            if size(&moved) > size(&best.0) {
                best = (moved, h);
            }
        }
        let (target, shift) = best;
        let zeta = if target.is_infinite() {
            C64::new(0.0, 0.0)
        } else {
            let u = target.z1 / target.z2;
            let n = match self.kind {
                LatticeKind::Square => 4,
                LatticeKind::Hexagonal => 6,
            };
            let e1 = self.roots[0];
            let t = (e1 / u).sqrt();
            super::schwarz_christoffel::polygon_integral(t, n, 0.5)? / e1.sqrt()
        };
        let zeta = self.polish(zeta, target);
        Ok(zeta - shift)
    }

    fn polish(&self, mut zeta: C64, target: ProjectivePoint) -> C64 {
        if target.is_infinite() {
            return zeta;
        }
        let invert = target.z1.norm() > target.z2.norm();
        let goal = if invert { target.z2 / target.z1 } else { target.z1 / target.z2 };
        let value = |z: C64| -> Option<(C64, C64)> {
            let p = self.p(z);
            let dp = self.p_prime(z);
            if invert {
                // g = 1/℘, g′ = −℘′/℘²
                let g = p.z2 / p.z1;
                let dp = dp.affine()?;
                Some((g, -dp * g * g))
            } else {
                Some((p.affine()?, dp.affine()?))
            }
        };
        for _ in 0..4 {
            let Some((g, dg)) = value(zeta) else { break };
            let err = g - goal;
            if err.norm() < 1e-15 * goal.norm().max(1.0) || dg.norm() < 1e-8 {
                break;
            }
            let step = err / dg;
            let next = zeta - step;
            match value(next) {
                Some((g2, _)) if (g2 - goal).norm() < err.norm() => zeta = next,
                _ => break,
            }
        }
        zeta
    }

    /// `(g₂, g₃) = (60 Σ′ w⁻⁴, 140 Σ′ w⁻⁶)` by summing the lattice row by row.
    ///
    /// Each row `n` is summed in closed form,
    /// `Σₘ (m + z)⁻⁴ = π⁴(s² − 2s/3)` and `Σₘ (m + z)⁻⁶ = π⁶(s³ − s² + 2s/15)`
    /// with `s = csc²(πz)`, and the rows decay geometrically in `n`.
    pub fn eisenstein_invariants(&self) -> (C64, C64) {
        let zeta4 = PI.powi(4) / 90.0;
        let zeta6 = PI.powi(6) / 945.0;
        let mut g4 = C64::new(2.0 * zeta4, 0.0);
        let mut g6 = C64::new(2.0 * zeta6, 0.0);
        for n in 1..200 {
            let z = self.tau * n as f64;
            // csc²(πz) = −4x/(1 − x)², x = e^{2πiz}, stable for Im z > 0
            let x = (2.0 * PI * I * z).exp();
            let s = -4.0 * x / ((1.0 - x) * (1.0 - x));
            let r4 = PI.powi(4) * (s * s - 2.0 / 3.0 * s);
            let r6 = PI.powi(6) * (s * s * s - s * s + 2.0 / 15.0 * s);
            g4 += 2.0 * r4;
            g6 += 2.0 * r6;
            if x.norm() < 1e-20 {
                break;
            }
        }
        (60.0 * g4, 140.0 * g6)
    }
}

/// ℘ for the given lattice (free-function form).
pub fn weierstrass_p(z: C64, lattice: &LatticeSpec) -> ProjectivePoint {
    lattice.p(z)
}

/// ℘′ for the given lattice (free-function form).
pub fn weierstrass_p_prime(z: C64, lattice: &LatticeSpec) -> ProjectivePoint {
    lattice.p_prime(z)
}

/// Eisenstein invariants `(g₂, g₃)` of the lattice.
pub fn eisenstein_invariants(lattice: &LatticeSpec) -> (C64, C64) {
    lattice.eisenstein_invariants()
}

/// Parses a lattice multiplier and checks it lies in the ring.
pub fn check_multiplier(lattice: &LatticeSpec, m: C64) -> Result<C64> {
    if lattice.is_multiplier(m) {
        Ok(m)
    } else {
        Err(Error::NotInRing(m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(p: ProjectivePoint) -> C64 {
        p.affine().expect("finite")
    }

    /// Direct lattice sum of the defining series over `|w| ≤ r`.
    fn brute_force_p(z: C64, tau: C64, r: i64) -> C64 {
        let mut s = 1.0 / (z * z);
        for m in -r..=r {
            for n in -r..=r {
                if (m, n) == (0, 0) {
                    continue;
                }
                let w = m as f64 + n as f64 * tau;
                if w.norm() > r as f64 {
                    continue;
                }
                s += 1.0 / ((z - w) * (z - w)) - 1.0 / (w * w);
            }
        }
        s
    }

    #[test]
    fn square_lattice_half_period_value() {
        let l = LatticeSpec::square();
        let e = l.roots();
        assert!((e[0] - C64::new(6.87518581802037, 0.0)).norm() < 1e-11);
        assert!(e[1].norm() < 1e-13);
        assert!((value(l.p(C64::new(0.5, 0.0))) - e[0]).norm() < 1e-11);
        assert!((value(l.p(C64::new(0.5, 0.5))) - e[1]).norm() < 1e-11);
        assert!((value(l.p(C64::new(0.0, 0.5))) - e[2]).norm() < 1e-11);
    }

    #[test]
    fn agrees_with_truncated_lattice_sum() {
        for l in [LatticeSpec::square(), LatticeSpec::hexagonal()] {
            for z in [C64::new(0.5, 0.0), C64::new(0.21, 0.13), C64::new(-0.3, 0.35)] {
                let direct = brute_force_p(z, l.tau, 200);
                let theta = value(l.p(z));
                assert!((direct - theta).norm() < 1e-3, "{:?} {z}: {direct} vs {theta}", l.kind);
            }
        }
    }

    #[test]
    fn pole_at_lattice_points() {
        let l = LatticeSpec::hexagonal();
        assert!(l.p(C64::new(0.0, 0.0)).is_infinite());
        assert!(l.p(1.0 + l.tau).chordal_distance(&ProjectivePoint::INFINITY) < 1e-12);
        assert!(l.p_prime(l.tau).chordal_distance(&ProjectivePoint::INFINITY) < 1e-12);
    }

    #[test]
    fn derivative_vanishes_at_half_periods() {
        for l in [LatticeSpec::square(), LatticeSpec::hexagonal()] {
            for h in l.half_periods() {
                assert!(value(l.p_prime(h)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn hexagonal_roots_are_rotated() {
        let l = LatticeSpec::hexagonal();
        let [e1, e2, e3] = l.roots();
        assert!(e1.im.abs() < 1e-12);
        let w2 = C64::from_polar(1.0, 2.0 * PI / 3.0);
        let mut set = [e2 / e1, e3 / e1];
        set.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((set[0] - w2.conj()).norm() < 1e-12 && (set[1] - w2).norm() < 1e-12);
    }

    #[test]
    fn inverse_round_trip() {
        for l in [LatticeSpec::square(), LatticeSpec::hexagonal()] {
            for u in [
                C64::new(0.1, 0.2),
                C64::new(30.0, -4.0),
                C64::new(-2.0, 1.0),
                l.roots()[0] * 1.0001,
                C64::new(0.0, 0.0),
            ] {
                let z = l.p_inverse(ProjectivePoint::finite(u)).unwrap();
                let back = l.p(z);
                assert!(back.chordal_distance(&ProjectivePoint::finite(u)) < 1e-10, "{u}");
            }
            assert!(l.p(l.p_inverse(ProjectivePoint::INFINITY).unwrap()).is_infinite());
        }
    }

    #[test]
    fn invariants_agree_with_roots() {
        for l in [LatticeSpec::square(), LatticeSpec::hexagonal()] {
            let (g2, g3) = l.eisenstein_invariants();
            let (h2, h3) = l.invariants_from_roots();
            assert!((g2 - h2).norm() < 1e-9 * g2.norm().max(1.0));
            assert!((g3 - h3).norm() < 1e-9 * g3.norm().max(1.0));
        }
    }

    #[test]
    fn multiplier_ring() {
        let sq = LatticeSpec::square();
        assert!(sq.is_multiplier(C64::new(2.0, 1.0)));
        assert!(!sq.is_multiplier(C64::new(0.5, 1.0)));
        let hex = LatticeSpec::hexagonal();
        assert!(hex.is_multiplier(1.0 + hex.tau));
        assert!(!hex.is_multiplier(C64::new(0.0, 1.0)));
    }
}
