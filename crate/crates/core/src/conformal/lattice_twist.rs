//! Rational self-maps of the sphere induced by multiplying a lattice.
//!
//! With `Π = N ∘ ℘` (the ℘-function followed by a normalizing Möbius map `N`),
//! multiplication by `m` in the multiplier ring descends to
//! `S_m = Π ∘ (z ↦ m z) ∘ Π⁻¹`, a rational map of degree `|m|²`.

use super::weierstrass::LatticeSpec;
use super::SphereMap;
use crate::error::{Error, Result};
use crate::geometry::{MobiusTransform, ProjectivePoint};
use crate::C64;
use serde::{Deserialize, Serialize};

/// How the ℘-sphere is identified with the image sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LatticeNormalization {
    /// Half periods `(1+τ)/2, 1/2, 0` go to `0, 1, ∞`.
    #[default]
    Anchors,
    /// `Π = c·℘` with `c` chosen so that `e₁ ↦ e1_image`; keeps `℘ = 0` at `0`.
    Scaled { e1_image: C64 },
    /// `Π = M ∘ ℘` for an explicit Möbius map.
    Custom { mobius: MobiusTransform },
}

impl LatticeNormalization {
    pub fn mobius(&self, lattice: &LatticeSpec) -> Result<MobiusTransform> {
        let [e1, e2, _] = lattice.roots();
        match *self {
            LatticeNormalization::Anchors => MobiusTransform::mapping_three(
                [ProjectivePoint::finite(e2), ProjectivePoint::finite(e1), ProjectivePoint::INFINITY],
                [ProjectivePoint::ZERO, ProjectivePoint::ONE, ProjectivePoint::INFINITY],
            ),
            LatticeNormalization::Scaled { e1_image } => MobiusTransform::scaling(e1_image / e1),
            LatticeNormalization::Custom { mobius } => Ok(mobius),
        }
    }
}

/// The map `S_m` for a lattice and multiplier.
#[derive(Debug, Clone)]
pub struct LatticeTwist {
    lattice: LatticeSpec,
    multiplier: C64,
    normalization: MobiusTransform,
    inverse_normalization: MobiusTransform,
    singular: Vec<ProjectivePoint>,
}

impl LatticeTwist {
    pub fn new(lattice: LatticeSpec, multiplier: C64, normalization: LatticeNormalization) -> Result<Self> {
        if !lattice.is_multiplier(multiplier) {
            return Err(Error::NotInRing(multiplier));
        }
        let n = normalization.mobius(&lattice)?;
        let mut twist = Self {
            inverse_normalization: n.inverse(),
            normalization: n,
            lattice,
            multiplier,
            singular: Vec::new(),
        };
        twist.singular = twist.compute_singular_points();
        Ok(twist)
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn multiplier(&self) -> C64 {
        self.multiplier
    }

    pub fn normalization(&self) -> MobiusTransform {
        self.normalization
    }

    /// `|m|²`, the degree of the induced rational map.
    pub fn degree(&self) -> usize {
        self.multiplier.norm_sqr().round() as usize
    }

    /// `Π(z) = N(℘(z))`.
    pub fn projection(&self, z: C64) -> ProjectivePoint {
        self.normalization.apply(self.lattice.p(z))
    }

    /// Images under `Π` of `(1/2m)Λ`: the critical points and critical values
    /// of `S_m`, where evaluation through `Π⁻¹` loses accuracy.
    fn compute_singular_points(&self) -> Vec<ProjectivePoint> {
        let m = self.multiplier;
        let span = 2 * self.degree() as i64 + 1;
        let mut reps: Vec<C64> = Vec::new();
        for j in -span..=span {
            for k in -span..=span {
                let z = self.lattice.reduce((j as f64 + k as f64 * self.lattice.tau) / (2.0 * m));
                if !reps.iter().any(|r| {
                    let d = self.lattice.reduce(z - r);
                    d.norm() < 1e-9
                }) {
                    reps.push(z);
                }
            }
        }
        let mut out: Vec<ProjectivePoint> = Vec::new();
        for z in reps {
            let p = self.projection(z);
            if !out.iter().any(|q| q.chordal_distance(&p) < 1e-9) {
                out.push(p);
            }
        }
        out
    }
}

/// Evaluates `S_m(z)` for the given lattice, multiplier, and normalization.
pub fn lattice_twist_map(
    z: ProjectivePoint,
    multiplier: C64,
    lattice: &LatticeSpec,
    normalization: LatticeNormalization,
) -> Result<Option<ProjectivePoint>> {
    Ok(LatticeTwist::new(lattice.clone(), multiplier, normalization)?.eval(z))
}

impl SphereMap for LatticeTwist {
    fn eval(&self, z: ProjectivePoint) -> Option<ProjectivePoint> {
        let u = self.inverse_normalization.apply(z);
        let zeta = self.lattice.p_inverse(u).ok()?;
        Some(self.projection(self.multiplier * zeta))
    }

    fn singular_points(&self) -> Vec<ProjectivePoint> {
        self.singular.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(t: &LatticeTwist, z: C64) -> ProjectivePoint {
        t.eval(ProjectivePoint::finite(z)).unwrap()
    }

    #[test]
    fn gaussian_one_plus_i() {
        let t = LatticeTwist::new(LatticeSpec::square(), C64::new(1.0, 1.0), Default::default()).unwrap();
        let i = C64::new(0.0, 1.0);
        for z in [C64::new(0.3, 0.4), C64::new(-1.2, 0.5), C64::new(2.0, -3.0)] {
            let expect = i / 2.0 * (-z + 1.0 / z);
            assert!(at(&t, z).chordal_distance(&ProjectivePoint::finite(expect)) < 1e-9);
        }
        assert_eq!(t.degree(), 2);
    }

    #[test]
    fn doubling() {
        let t = LatticeTwist::new(LatticeSpec::square(), C64::new(2.0, 0.0), Default::default()).unwrap();
        for z in [C64::new(0.3, 0.4), C64::new(-1.2, 0.5)] {
            let z2 = z * z;
            let expect = (z2 + 1.0).powi(2) / (4.0 * z * (z2 - 1.0));
            assert!(at(&t, z).chordal_distance(&ProjectivePoint::finite(expect)) < 1e-9);
        }
    }

    #[test]
    fn rejects_non_multipliers() {
        let r = LatticeTwist::new(LatticeSpec::square(), C64::new(0.5, 0.0), Default::default());
        assert!(matches!(r, Err(Error::NotInRing(_))));
    }

    #[test]
    fn singular_set_contains_anchors() {
        let t = LatticeTwist::new(LatticeSpec::square(), C64::new(1.0, 1.0), Default::default()).unwrap();
        let s = t.singular_points();
        for p in [ProjectivePoint::ZERO, ProjectivePoint::ONE, ProjectivePoint::INFINITY] {
            assert!(s.iter().any(|q| q.chordal_distance(&p) < 1e-9));
        }
    }
}
