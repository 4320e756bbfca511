//! Analytic maps of the Riemann sphere used as pull-backs.
//!
//! A map is anything implementing [`SphereMap`]; [`PullbackMap`] chains them
//! and fuses neighbouring Möbius stages into one matrix.

mod elementary;
pub mod hypergeometric;
mod lattice_twist;
pub mod quadrature;
mod schwarz_christoffel;
mod weierstrass;

use std::sync::Arc;

use crate::geometry::{MobiusTransform, ProjectivePoint};
use crate::C64;

pub use elementary::{exp_strip_map, power_map, ExpStripMap, PowerMap};
pub use hypergeometric::hyp2f1 as hypergeometric_2f1;
pub use lattice_twist::{lattice_twist_map, LatticeNormalization, LatticeTwist};
pub use schwarz_christoffel::{polygon_integral, schwarz_christoffel, schwarz_christoffel_inverse};
pub use weierstrass::{
    check_multiplier, eisenstein_invariants, weierstrass_p, weierstrass_p_prime, LatticeKind, LatticeSpec,
};

/// A map `Ĉ → Ĉ`, evaluated on projective points.
pub trait SphereMap: Send + Sync {
    /// `None` where the map is undefined.
    fn eval(&self, z: ProjectivePoint) -> Option<ProjectivePoint>;

    /// Finite set of points where the map is undefined, branched, or
    /// numerically delicate.
    fn singular_points(&self) -> Vec<ProjectivePoint> {
        Vec::new()
    }

    /// Chordal distance from `z` to the declared singular set.
    fn distance_to_singular(&self, z: ProjectivePoint) -> f64 {
        self.singular_points()
            .iter()
            .map(|p| p.chordal_distance(&z))
            .fold(f64::INFINITY, f64::min)
    }
}

impl SphereMap for MobiusTransform {
    fn eval(&self, z: ProjectivePoint) -> Option<ProjectivePoint> {
        Some(self.apply(z))
    }
}

impl<T: SphereMap + ?Sized> SphereMap for Arc<T> {
    fn eval(&self, z: ProjectivePoint) -> Option<ProjectivePoint> {
        (**self).eval(z)
    }

    fn singular_points(&self) -> Vec<ProjectivePoint> {
        (**self).singular_points()
    }

    fn distance_to_singular(&self, z: ProjectivePoint) -> f64 {
        (**self).distance_to_singular(z)
    }
}

#[derive(Clone)]
enum Stage {
    Mobius(MobiusTransform),
    Map(Arc<dyn SphereMap>),
}

/// A composite pull-back map, stored in evaluation order: the first stage is
/// applied to `z` first.
#[derive(Clone, Default)]
pub struct PullbackMap {
    stages: Vec<Stage>,
}

impl std::fmt::Debug for PullbackMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names: Vec<&str> = self
            .stages
            .iter()
            .map(|s| match s {
                Stage::Mobius(_) => "mobius",
                Stage::Map(_) => "map",
            })
            .collect();
        f.debug_struct("PullbackMap").field("stages", &names).finish()
    }
}

impl PullbackMap {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn mobius(m: MobiusTransform) -> Self {
        Self::identity().then_mobius(m)
    }

    pub fn map(map: impl SphereMap + 'static) -> Self {
        Self::identity().then(map)
    }

    /// `m ∘ self`.
    pub fn then_mobius(mut self, m: MobiusTransform) -> Self {
        match self.stages.last_mut() {
            Some(Stage::Mobius(prev)) => *prev = m.compose(prev),
            _ => self.stages.push(Stage::Mobius(m)),
        }
        self
    }

    /// `map ∘ self`.
    pub fn then(mut self, map: impl SphereMap + 'static) -> Self {
        self.stages.push(Stage::Map(Arc::new(map)));
        self
    }

    /// `outer ∘ self`.
    pub fn then_all(mut self, outer: &PullbackMap) -> Self {
        for s in &outer.stages {
            self = match s {
                Stage::Mobius(m) => self.then_mobius(*m),
                Stage::Map(f) => {
                    self.stages.push(Stage::Map(f.clone()));
                    self
                }
            };
        }
        self
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &PullbackMap) -> PullbackMap {
        inner.clone().then_all(self)
    }

    /// `chart⁻¹ ∘ self ∘ chart`: the map expressed in another coordinate.
    pub fn conjugated(&self, chart: &MobiusTransform) -> PullbackMap {
        PullbackMap::mobius(*chart).then_all(self).then_mobius(chart.inverse())
    }

    /// The single matrix when every stage is Möbius.
    pub fn as_mobius(&self) -> Option<MobiusTransform> {
        match self.stages.as_slice() {
            [] => Some(MobiusTransform::IDENTITY),
            [Stage::Mobius(m)] => Some(*m),
            _ => None,
        }
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }
}

impl SphereMap for PullbackMap {
    fn eval(&self, mut z: ProjectivePoint) -> Option<ProjectivePoint> {
        for s in &self.stages {
            z = match s {
                Stage::Mobius(m) => m.apply(z),
                Stage::Map(f) => f.eval(z)?,
            };
            if !z.is_valid() {
                return None;
            }
        }
        Some(z)
    }

    /// Singular points of the first non-Möbius stage, pulled back to the
    /// input coordinate.
    fn singular_points(&self) -> Vec<ProjectivePoint> {
        let mut pre = MobiusTransform::IDENTITY;
        for s in &self.stages {
            match s {
                Stage::Mobius(m) => pre = m.compose(&pre),
                Stage::Map(f) => {
                    let back = pre.inverse();
                    return f.singular_points().into_iter().map(|p| back.apply(p)).collect();
                }
            }
        }
        Vec::new()
    }

    /// Smallest distance, over stages, from the running point to that
    /// stage's singular set.
    fn distance_to_singular(&self, mut z: ProjectivePoint) -> f64 {
        let mut best = f64::INFINITY;
        for s in &self.stages {
            match s {
                Stage::Mobius(m) => z = m.apply(z),
                Stage::Map(f) => {
                    best = best.min(f.distance_to_singular(z));
                    match f.eval(z) {
                        Some(w) => z = w,
                        None => return 0.0,
                    }
                }
            }
        }
        best
    }
}

/// Relative Cauchy–Riemann residual `|∂g/∂y − i ∂g/∂x| / max(|∂g/∂x|, |∂g/∂y|)`
/// of `map` at `z`, by central differences with step `h`.
///
/// Both source and target are read in whichever of the charts `z` or `1/z`
/// keeps the coordinate in the unit disk. Returns `None` if the map is
/// undefined at any stencil point.
pub fn cauchy_riemann_residual(map: &dyn SphereMap, z: ProjectivePoint, h: f64) -> Option<f64> {
    let z = z.normalized();
    let source_inverted = z.z1.norm() > z.z2.norm();
    let zeta = if source_inverted { z.z2 / z.z1 } else { z.z1 / z.z2 };
    let centre = map.eval(z)?.normalized();
    let target_inverted = centre.z1.norm() > centre.z2.norm();
    let g = |d: C64| -> Option<C64> {
        let s = zeta + d;
        let p = if source_inverted {
            ProjectivePoint::new(C64::new(1.0, 0.0), s)
        } else {
            ProjectivePoint::finite(s)
        };
        let w = map.eval(p)?;
        let (num, den) = if target_inverted { (w.z2, w.z1) } else { (w.z1, w.z2) };
        let v = num / den;
        v.is_finite().then_some(v)
    };
    let gx = (g(C64::new(h, 0.0))? - g(C64::new(-h, 0.0))?) / (2.0 * h);
    let gy = (g(C64::new(0.0, h))? - g(C64::new(0.0, -h))?) / (2.0 * h);
    let scale = gx.norm().max(gy.norm());
    if scale == 0.0 {
        return Some(0.0);
    }
    Some((gy - C64::new(0.0, 1.0) * gx).norm() / scale)
}
