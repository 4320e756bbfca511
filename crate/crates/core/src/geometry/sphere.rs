use super::ProjectivePoint;
use crate::C64;
use std::f64::consts::{FRAC_PI_2, TAU};

/// A point of the unit sphere in R³.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpherePoint {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl SpherePoint {
    pub const NORTH: Self = Self { u: 0.0, v: 0.0, w: 1.0 };
    pub const SOUTH: Self = Self { u: 0.0, v: 0.0, w: -1.0 };

    /// Projects an arbitrary nonzero vector onto the sphere.
    pub fn new(u: f64, v: f64, w: f64) -> Self {
        let n = (u * u + v * v + w * w).sqrt();
        Self { u: u / n, v: v / n, w: w / n }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.u * other.u + self.v * other.v + self.w * other.w
    }

    /// Great-circle distance in radians.
    pub fn angle_to(&self, other: &Self) -> f64 {
        let cross = [
            self.v * other.w - self.w * other.v,
            self.w * other.u - self.u * other.w,
            self.u * other.v - self.v * other.u,
        ];
        let s = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
        s.atan2(self.dot(other))
    }

    pub fn distance(&self, other: &Self) -> f64 {
        let (du, dv, dw) = (self.u - other.u, self.v - other.v, self.w - other.w);
        (du * du + dv * dv + dw * dw).sqrt()
    }

    pub fn antipode(&self) -> Self {
        Self { u: -self.u, v: -self.v, w: -self.w }
    }
}

/// Longitude `theta ∈ [0, 2π)` and latitude `phi ∈ [−π/2, π/2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquirectCoord {
    pub theta: f64,
    pub phi: f64,
}

impl EquirectCoord {
    /// Wraps `theta` into `[0, 2π)` and clamps `phi`.
    pub fn new(theta: f64, phi: f64) -> Self {
        let mut t = theta.rem_euclid(TAU);
        if t >= TAU {
            t = 0.0;
        }
        Self { theta: t, phi: phi.clamp(-FRAC_PI_2, FRAC_PI_2) }
    }
}

/// Stereographic projection from the north pole: `(u, v, w) ↦ (u + iv) / (1 − w)`.
///
/// The north pole lands on the pair `(2, 0)`, i.e. infinity. On the northern
/// hemisphere the equivalent pair `(1 + w, u − iv)` is used, which avoids the
/// cancellation in `1 − w`.
pub fn stereographic_project(p: SpherePoint) -> ProjectivePoint {
    if p.w <= 0.0 {
        ProjectivePoint::new(C64::new(p.u, p.v), C64::new(1.0 - p.w, 0.0))
    } else {
        ProjectivePoint::new(C64::new(1.0 + p.w, 0.0), C64::new(p.u, -p.v))
    }
}

/// Inverse of [`stereographic_project`].
pub fn stereographic_unproject(q: ProjectivePoint) -> SpherePoint {
    let q = q.normalized();
    let a = q.z1.norm_sqr();
    let b = q.z2.norm_sqr();
    let n = a + b;
    let uv = q.z1 * q.z2.conj() * 2.0 / n;
    SpherePoint::new(uv.re, uv.im, (a - b) / n)
}

/// `theta = 0, phi = 0` is `(1, 0, 0)`; `phi = π/2` is the north pole.
pub fn equirect_to_sphere(c: EquirectCoord) -> SpherePoint {
    let (sp, cp) = c.phi.sin_cos();
    let (st, ct) = c.theta.sin_cos();
    SpherePoint { u: cp * ct, v: cp * st, w: sp }
}

/// Inverse of [`equirect_to_sphere`]; `theta` is reported as 0 at the poles.
pub fn sphere_to_equirect(p: SpherePoint) -> EquirectCoord {
    let r = p.u.hypot(p.v);
    let phi = p.w.atan2(r);
    let theta = if r == 0.0 { 0.0 } else { p.v.atan2(p.u) };
    EquirectCoord::new(theta, phi)
}
