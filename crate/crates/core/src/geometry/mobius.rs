use super::ProjectivePoint;
use crate::error::{Error, Result};
use crate::C64;
use serde::{Deserialize, Serialize};

const CLASSIFY_TOL: f64 = 1e-9;

/// `z ↦ (az + b) / (cz + d)`, stored with `ad − bc = 1`.
///
/// The determinant is fixed only up to the sign of the whole matrix; both
/// signs describe the same map and are treated as equal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobiusTransform {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

/// Conjugacy class of a Möbius transformation, read off the trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MobiusClass {
    Elliptic,
    Hyperbolic,
    Parabolic,
    Loxodromic,
}

impl MobiusTransform {
    pub const IDENTITY: Self = Self {
        a: C64::new(1.0, 0.0),
        b: C64::new(0.0, 0.0),
        c: C64::new(0.0, 0.0),
        d: C64::new(1.0, 0.0),
    };

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        let m = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::SingularMatrix(0.0));
        }
        let (a, b, c, d) = (a / m, b / m, c / m, d / m);
        let det = a * d - b * c;
        if det.norm() <= 1e-14 {
            return Err(Error::SingularMatrix(det.norm()));
        }
        let s = det.sqrt();
        Ok(Self { a: a / s, b: b / s, c: c / s, d: d / s })
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    /// `z ↦ k·z`.
    pub fn scaling(k: C64) -> Result<Self> {
        Self::new(k, C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    /// `z ↦ e^{iθ}·z`, the rotation about the poles.
    pub fn rotation(angle: f64) -> Self {
        Self::scaling(C64::from_polar(1.0, angle)).expect("unit scaling is invertible")
    }

    pub fn translation(w: C64) -> Self {
        Self::new(C64::new(1.0, 0.0), w, C64::new(0.0, 0.0), C64::new(1.0, 0.0))
            .expect("translation is invertible")
    }

    pub fn apply(&self, q: ProjectivePoint) -> ProjectivePoint {
        ProjectivePoint::new(self.a * q.z1 + self.b * q.z2, self.c * q.z1 + self.d * q.z2)
    }

    pub fn apply_affine(&self, z: C64) -> ProjectivePoint {
        self.apply(ProjectivePoint::finite(z))
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        let a = self.a * other.a + self.b * other.c;
        let b = self.a * other.b + self.b * other.d;
        let c = self.c * other.a + self.d * other.c;
        let d = self.c * other.b + self.d * other.d;
        Self::new(a, b, c, d).expect("product of invertible matrices")
    }

    pub fn inverse(&self) -> Self {
        // adjugate; the determinant is already 1
        Self { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn conjugate_by(&self, chart: &Self) -> Self {
        chart.inverse().compose(self).compose(chart)
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    pub fn classify(&self) -> MobiusClass {
        let t2 = self.trace() * self.trace();
        if (t2 - 4.0).norm() < CLASSIFY_TOL {
            MobiusClass::Parabolic
        } else if t2.im.abs() < CLASSIFY_TOL {
            if t2.re >= 0.0 && t2.re < 4.0 {
                MobiusClass::Elliptic
            } else if t2.re > 4.0 {
                MobiusClass::Hyperbolic
            } else {
                MobiusClass::Loxodromic
            }
        } else {
            MobiusClass::Loxodromic
        }
    }

    /// A transformation sending `p ↦ 0` and `q ↦ ∞`.
    pub fn normalizing(p: ProjectivePoint, q: ProjectivePoint) -> Result<Self> {
        if p.approx_eq(&q, 1e-12) {
            return Err(Error::DegeneratePoints);
        }
        let (p, q) = (p.normalized(), q.normalized());
        Self::new(p.z2, -p.z1, q.z2, -q.z1).map_err(|_| Error::DegeneratePoints)
    }

    /// Rotation by `angle` and scaling by `scale` about the fixed points `p` and `q`.
    ///
    /// Near `p` the map looks like `w ↦ scale·e^{i·angle}·w`; `q` is the other
    /// fixed point. With `scale = 1` it is elliptic, with `angle = 0` hyperbolic.
    pub fn two_point(p: ProjectivePoint, q: ProjectivePoint, angle: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
        }
        let chart = Self::normalizing(p, q)?;
        let core = Self::scaling(C64::from_polar(scale, angle))?;
        Ok(core.conjugate_by(&chart))
    }

    /// The unique transformation sending `from[k] ↦ to[k]` for `k = 0, 1, 2`.
    pub fn mapping_three(from: [ProjectivePoint; 3], to: [ProjectivePoint; 3]) -> Result<Self> {
        let f = Self::to_zero_one_infinity(from)?;
        let t = Self::to_zero_one_infinity(to)?;
        Ok(t.inverse().compose(&f))
    }

    /// Sends `pts[0] ↦ 0`, `pts[1] ↦ 1`, `pts[2] ↦ ∞`.
    pub fn to_zero_one_infinity(pts: [ProjectivePoint; 3]) -> Result<Self> {
        let [p0, p1, p2] = pts.map(|p| p.normalized());
        let form = |p: &ProjectivePoint, z: &ProjectivePoint| z.z1 * p.z2 - z.z2 * p.z1;
        let k0 = form(&p2, &p1);
        let k2 = form(&p0, &p1);
        Self::new(k0 * p0.z2, -k0 * p0.z1, k2 * p2.z2, -k2 * p2.z1)
            .map_err(|_| Error::DegeneratePoints)
    }

    /// Fixed points of the map (one for parabolic maps, two otherwise).
    pub fn fixed_points(&self) -> Vec<ProjectivePoint> {
        // c z² + (d − a) z − b = 0, homogeneous in (z1, z2)
        let (qa, qb, qc) = (self.c, self.d - self.a, -self.b);
        if qa.norm() < 1e-14 {
            let mut out = vec![ProjectivePoint::INFINITY];
            if qb.norm() > 1e-14 {
                out.push(ProjectivePoint::finite(-qc / qb));
            }
            return out;
        }
        let disc = (qb * qb - qa * qc * 4.0).sqrt();
        let r1 = ProjectivePoint::new(-qb + disc, qa * 2.0);
        let r2 = ProjectivePoint::new(-qb - disc, qa * 2.0);
        if r1.approx_eq(&r2, 1e-12) {
            vec![r1]
        } else {
            vec![r1, r2]
        }
    }

    /// Same map, allowing for the sign ambiguity of the normalized matrix.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let diff = |s: f64| {
            (self.a - other.a * s).norm()
                + (self.b - other.b * s).norm()
                + (self.c - other.c * s).norm()
                + (self.d - other.d * s).norm()
        };
        diff(1.0).min(diff(-1.0)) < tol
    }
}

impl Default for MobiusTransform {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// Where the working coordinate `z` sits on the equirectangular frame.
///
/// Every map is written in the working coordinate; the orientation is a
/// rotation of the sphere applied before and undone after.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// Top row is ∞, bottom row is 0.
    #[default]
    NorthInfinity,
    /// Top row is 0, bottom row is ∞.
    NorthZero,
    /// 0 at the centre of the frame (longitude π on the equator), ∞ at the
    /// seam behind the viewer.
    FrontZero,
}

impl Orientation {
    /// Rotation taking the image coordinate to the working coordinate.
    pub fn chart(&self) -> MobiusTransform {
        match self {
            Orientation::NorthInfinity => MobiusTransform::IDENTITY,
            Orientation::NorthZero => MobiusTransform::from_real(0.0, 1.0, 1.0, 0.0).unwrap(),
            Orientation::FrontZero => MobiusTransform::from_real(1.0, 1.0, -1.0, 1.0).unwrap(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pt(re: f64, im: f64) -> ProjectivePoint {
        ProjectivePoint::finite(C64::new(re, im))
    }

    #[test]
    fn special_cases_at_infinity() {
        let m = MobiusTransform::from_real(2.0, 1.0, 1.0, 3.0).unwrap();
        // M(∞) = a/c, M(−d/c) = ∞
        assert!(m.apply(ProjectivePoint::INFINITY).approx_eq(&pt(2.0, 0.0), 1e-14));
        assert!(m.apply(pt(-3.0, 0.0)).is_infinite());
        let affine = MobiusTransform::from_real(2.0, 1.0, 0.0, 1.0).unwrap();
        assert!(affine.apply(ProjectivePoint::INFINITY).is_infinite());
    }

    #[test]
    fn cayley_rotation_fixes_i() {
        let m = MobiusTransform::from_real(1.0, 1.0, -1.0, 1.0).unwrap();
        assert!(m.apply(pt(0.0, 1.0)).approx_eq(&pt(0.0, 1.0), 1e-14));
        assert!(m.apply(pt(0.0, -1.0)).approx_eq(&pt(0.0, -1.0), 1e-14));
    }

    #[test]
    fn scaling_examples() {
        let m = MobiusTransform::from_real(2.0, 0.0, 0.0, 1.0).unwrap();
        assert!(m.apply(pt(3.0, 0.0)).approx_eq(&pt(6.0, 0.0), 1e-14));
        let six = MobiusTransform::from_real(6.0, 0.0, 0.0, 1.0).unwrap();
        let three = MobiusTransform::from_real(3.0, 0.0, 0.0, 1.0).unwrap();
        assert!(m.compose(&three).approx_eq(&six, 1e-12));
    }

    #[test]
    fn two_point_examples() {
        let zero = ProjectivePoint::ZERO;
        let inf = ProjectivePoint::INFINITY;
        let rot = MobiusTransform::two_point(zero, inf, PI / 8.0, 1.0).unwrap();
        let expect = MobiusTransform::scaling(C64::from_polar(1.0, PI / 8.0)).unwrap();
        assert!(rot.approx_eq(&expect, 1e-12));

        let zoom = MobiusTransform::two_point(zero, inf, 0.0, 2.0).unwrap();
        assert!(zoom.approx_eq(&MobiusTransform::from_real(2.0, 0.0, 0.0, 1.0).unwrap(), 1e-12));

        let quarter = MobiusTransform::two_point(pt(0.0, 1.0), pt(0.0, -1.0), PI / 2.0, 1.0).unwrap();
        let cayley = MobiusTransform::from_real(1.0, 1.0, -1.0, 1.0).unwrap();
        assert!(quarter.approx_eq(&cayley, 1e-12));

        assert!(matches!(MobiusTransform::two_point(zero, zero, 1.0, 1.0), Err(Error::DegeneratePoints)));
    }

    #[test]
    fn classification_examples() {
        let e = MobiusTransform::scaling(C64::from_polar(1.0, PI / 8.0)).unwrap();
        assert_eq!(e.classify(), MobiusClass::Elliptic);
        let s = 2f64.sqrt();
        let h = MobiusTransform::from_real(s, 0.0, 0.0, 1.0 / s).unwrap();
        assert_eq!(h.classify(), MobiusClass::Hyperbolic);
        let p = MobiusTransform::from_real(1.0, 0.5, 0.0, 1.0).unwrap();
        assert_eq!(p.classify(), MobiusClass::Parabolic);
        let l = MobiusTransform::scaling(C64::from_polar(2.0, 0.3)).unwrap();
        assert_eq!(l.classify(), MobiusClass::Loxodromic);
    }

    #[test]
    fn three_point_map() {
        let from = [pt(0.2, 0.1), pt(-1.0, 3.0), ProjectivePoint::INFINITY];
        let to = [pt(1.0, 1.0), ProjectivePoint::ZERO, pt(5.0, -2.0)];
        let m = MobiusTransform::mapping_three(from, to).unwrap();
        for k in 0..3 {
            assert!(m.apply(from[k]).approx_eq(&to[k], 1e-12));
        }
    }

    #[test]
    fn orientation_charts() {
        let nz = Orientation::NorthZero.chart();
        assert!(nz.apply(ProjectivePoint::INFINITY).approx_eq(&ProjectivePoint::ZERO, 1e-15));
        let fz = Orientation::FrontZero.chart();
        assert!(fz.apply(pt(-1.0, 0.0)).approx_eq(&ProjectivePoint::ZERO, 1e-15));
    }

    #[test]
    fn fixed_points_of_two_point_map() {
        let p = pt(0.4, -0.2);
        let q = pt(-2.0, 1.0);
        let m = MobiusTransform::two_point(p, q, 0.7, 3.0).unwrap();
        let fp = m.fixed_points();
        assert_eq!(fp.len(), 2);
        assert!(fp.iter().any(|f| f.approx_eq(&p, 1e-9)));
        assert!(fp.iter().any(|f| f.approx_eq(&q, 1e-9)));
    }
}
