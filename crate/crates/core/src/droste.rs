//! Straight and twisted Droste images.
//!
//! After a Möbius normalization `N` sending the limit points `p, q` to `0, ∞`,
//! the fundamental annulus is `r ≤ |w| < λr` and the deck group is generated
//! by `w ↦ λw`. A straight Droste image samples the input at the annulus
//! representative of `w`. A twisted one first applies `w ↦ w^α` with
//! `α = 1 + k·log λ / 2πi`, which turns once around the origin into `k`
//! steps of the deck group, so the reduction hides the branch cut of `log`.

use std::f64::consts::TAU;

use crate::conformal::SphereMap;
use crate::error::{Error, Result};
use crate::geometry::{MobiusTransform, ProjectivePoint};
use crate::raster::{Raster, SphericalImage};
use crate::resample::{render, sample_point, Lookup, SampleOptions};
use crate::C64;

/// Parameters of a Droste construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrosteSpec {
    /// Limit point sent to `0`.
    pub p: ProjectivePoint,
    /// Limit point sent to `∞`.
    pub q: ProjectivePoint,
    /// Ratio of the annulus radii, `> 1`.
    pub lambda: f64,
    /// Winding of the spiral; `0` is a straight Droste image.
    pub twist: i32,
    /// Inner radius of the annulus in normalized coordinates.
    pub inner_radius: f64,
}

/// A circle in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: C64,
    pub radius: f64,
}

impl Circle {
    /// The circle through three points.
    pub fn through(a: C64, b: C64, c: C64) -> Result<Self> {
        let (b, c) = (b - a, c - a);
        let d = 2.0 * (b.re * c.im - b.im * c.re);
        if d.abs() < 1e-14 * b.norm_sqr().max(c.norm_sqr()) {
            return Err(Error::DegeneratePoints);
        }
        let (bb, cc) = (b.norm_sqr(), c.norm_sqr());
        let u = C64::new((c.im * bb - b.im * cc) / d, (b.re * cc - c.re * bb) / d);
        Ok(Circle { center: a + u, radius: u.norm() })
    }
}

impl DrosteSpec {
    pub fn new(p: ProjectivePoint, q: ProjectivePoint, lambda: f64, twist: i32, inner_radius: f64) -> Result<Self> {
        let spec = Self { p, q, lambda, twist, inner_radius };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 1.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("Droste λ must exceed 1, got {}", self.lambda)));
        }
        if !(self.inner_radius > 0.0 && self.inner_radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Droste inner radius must be positive, got {}",
                self.inner_radius
            )));
        }
        self.normalization().map(|_| ())
    }

    /// Fits the construction to two nested circles, the annulus between
    /// them becoming the fundamental domain.
    pub fn from_circles(inner: Circle, outer: Circle, twist: i32) -> Result<Self> {
        let offset = outer.center - inner.center;
        let d = offset.norm();
        if d + inner.radius >= outer.radius {
            return Err(Error::InvalidParameter("inner circle must lie inside the outer circle".into()));
        }
        let (p, q) = if d < 1e-12 * outer.radius {
            (ProjectivePoint::finite(inner.center), ProjectivePoint::INFINITY)
        } else {
            // limit points lie on the line of centres at distances t from the
            // inner centre with t² − s·t + r₁² = 0
            let u = offset / d;
            let s = (inner.radius.powi(2) + d * d - outer.radius.powi(2)) / d;
            let disc = (s * s - 4.0 * inner.radius.powi(2)).sqrt();
            let (t1, t2) = ((s - disc) / 2.0, (s + disc) / 2.0);
            let (near, far) = if t1.abs() < t2.abs() { (t1, t2) } else { (t2, t1) };
            (
                ProjectivePoint::finite(inner.center + u * near),
                ProjectivePoint::finite(inner.center + u * far),
            )
        };
        let n = MobiusTransform::normalizing(p, q)?;
        let radius_of = |c: Circle| {
            let w = n.apply(ProjectivePoint::finite(c.center + c.radius)).normalized();
            (w.z1 / w.z2).norm()
        };
        let (ri, ro) = (radius_of(inner), radius_of(outer));
        Self::new(p, q, ro / ri, twist, ri)
    }

    /// `N`, sending `p ↦ 0` and `q ↦ ∞`.
    pub fn normalization(&self) -> Result<MobiusTransform> {
        MobiusTransform::normalizing(self.p, self.q)
    }

    /// Exponent of the spiral map `w ↦ w^α`.
    pub fn alpha(&self) -> C64 {
        C64::new(1.0, 0.0) + self.twist as f64 * self.lambda.ln() / C64::new(0.0, TAU)
    }

    /// Angle between the spiral arms and the circles about the limit points.
    pub fn spiral_pitch(&self) -> f64 {
        (self.twist.abs() as f64 * self.lambda.ln() / TAU).atan()
    }

    /// The representative `w·λ^{−k}` of `w` in the fundamental annulus, and `k`.
    pub fn annulus_reduce(&self, w: C64) -> Option<(C64, i64)> {
        let m = w.norm();
        if !(m > 0.0 && m.is_finite()) {
            return None;
        }
        let mut k = ((m / self.inner_radius).ln() / self.lambda.ln()).floor() as i64;
        let mut z = w * self.lambda.powi(-k as i32);
        // floor of a rounded log can be off by one at the boundary
        if z.norm() < self.inner_radius {
            k -= 1;
            z *= self.lambda;
        } else if z.norm() >= self.lambda * self.inner_radius {
            k += 1;
            z /= self.lambda;
        }
        Some((z, k))
    }
}

/// `annulus_reduce` as a free function.
pub fn annulus_reduce(w: C64, spec: &DrosteSpec) -> Option<(C64, i64)> {
    spec.annulus_reduce(w)
}

/// The Droste pull-back map for a spec.
#[derive(Debug, Clone)]
pub struct DrosteMap {
    spec: DrosteSpec,
    n: MobiusTransform,
    n_inv: MobiusTransform,
    alpha: C64,
}

impl DrosteMap {
    pub fn new(spec: DrosteSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.normalization()?;
        Ok(Self { spec, n, n_inv: n.inverse(), alpha: spec.alpha() })
    }

    pub fn spec(&self) -> &DrosteSpec {
        &self.spec
    }

    /// One step of the output's deck group: `N⁻¹(μ·N(z))` with `μ = λ^{1/α}`,
    /// which is `λ` itself for a straight Droste.
    pub fn deck(&self, z: ProjectivePoint) -> ProjectivePoint {
        let mu = if self.spec.twist == 0 {
            C64::new(self.spec.lambda, 0.0)
        } else {
            (self.spec.lambda.ln() / self.alpha).exp()
        };
        let w = self.n.apply(z);
        self.n_inv.apply(ProjectivePoint::new(w.z1 * mu, w.z2))
    }

    /// Normalized coordinate of `z` before reduction, or `None` at the
    /// limit points.
    fn spiral(&self, z: ProjectivePoint) -> Option<C64> {
        let w = self.n.apply(z).normalized();
        if w.z1.norm() == 0.0 || w.z2.norm() == 0.0 {
            return None;
        }
        let log_w = w.z1.ln() - w.z2.ln();
        let s = if self.spec.twist == 0 { log_w } else { self.alpha * log_w };
        Some(s)
    }
}

impl SphereMap for DrosteMap {
    fn eval(&self, z: ProjectivePoint) -> Option<ProjectivePoint> {
        let s = self.spiral(z)?;
        // reduce in log coordinates to avoid overflow of exp
        let lr = self.spec.inner_radius.ln();
        let ll = self.spec.lambda.ln();
        let k = ((s.re - lr) / ll).floor();
        let (w, _) = self.spec.annulus_reduce((s - k * ll).exp())?;
        Some(self.n_inv.apply(ProjectivePoint::finite(w)))
    }

    fn singular_points(&self) -> Vec<ProjectivePoint> {
        vec![self.spec.p, self.spec.q]
    }

    /// Also counts the seams where the reduction jumps between boundary
    /// circles, measured in log-radius units.
    fn distance_to_singular(&self, z: ProjectivePoint) -> f64 {
        let pole = self.spec.p.chordal_distance(&z).min(self.spec.q.chordal_distance(&z));
        match self.spiral(z) {
            Some(s) => {
                let f = (s.re - self.spec.inner_radius.ln()) / self.spec.lambda.ln();
                let seam = (f - f.round()).abs() * self.spec.lambda.ln();
                pole.min(seam)
            }
            None => 0.0,
        }
    }
}

/// Straight or twisted Droste image, depending on `spec.twist`.
pub fn droste(input: &SphericalImage, spec: &DrosteSpec, opts: &SampleOptions) -> Result<SphericalImage> {
    let map = DrosteMap::new(*spec)?;
    crate::resample::pull_back(input, &map, opts)
}

/// The straight Droste image; `spec.twist` must be `0`.
pub fn straight_droste(input: &SphericalImage, spec: &DrosteSpec, opts: &SampleOptions) -> Result<SphericalImage> {
    if spec.twist != 0 {
        return Err(Error::InvalidParameter("straight Droste needs twist = 0".into()));
    }
    droste(input, spec, opts)
}

/// The twisted Droste image; `spec.twist` must be nonzero.
pub fn twisted_droste(input: &SphericalImage, spec: &DrosteSpec, opts: &SampleOptions) -> Result<SphericalImage> {
    if spec.twist == 0 {
        return Err(Error::InvalidParameter("twisted Droste needs a nonzero twist".into()));
    }
    droste(input, spec, opts)
}

/// One period of the annulus in log coordinates: column `x` is log-radius
/// from `log r` (left) to `log λr` (right), row `y` is angle `0..2π`.
pub fn log_strip_unwrap(input: &SphericalImage, spec: &DrosteSpec, height: usize, opts: &SampleOptions) -> Result<Raster> {
    spec.validate()?;
    opts.validate()?;
    let n_inv = spec.normalization()?.inverse();
    let width = ((height as f64 * spec.lambda.ln() / TAU).round() as usize).max(1);
    let lr = spec.inner_radius.ln();
    let ll = spec.lambda.ln();
    let mut out = Raster::new(width, height, input.channels(), input.depth())?;
    let k = opts.supersample as usize;
    for y in 0..height {
        for x in 0..width {
            let mut acc = [0.0; 4];
            for j in 0..k {
                for i in 0..k {
                    let s = lr + ll * (x as f64 + (i as f64 + 0.5) / k as f64) / width as f64;
                    let t = TAU * (y as f64 + (j as f64 + 0.5) / k as f64) / height as f64;
                    let z = n_inv.apply(ProjectivePoint::finite(C64::new(s, t).exp()));
                    let l = lookup_linear(sample_point(input, z, opts.filter), input.depth());
                    for c in 0..4 {
                        acc[c] += l[c];
                    }
                }
            }
            let px = encode(acc.map(|v| v / (k * k) as f64), input.depth());
            out.put_pixel(x, y, &px);
        }
    }
    Ok(out)
}

/// Wraps a log strip back onto the sphere as a straight Droste image; the
/// inverse of [`log_strip_unwrap`] on the annulus.
pub fn log_strip_wrap(strip: &Raster, spec: &DrosteSpec, height: usize, opts: &SampleOptions) -> Result<SphericalImage> {
    spec.validate()?;
    let n = spec.normalization()?;
    let (sw, sh) = (strip.width(), strip.height());
    let lr = spec.inner_radius.ln();
    let ll = spec.lambda.ln();
    let raster = render(2 * height, height, strip.channels(), strip.depth(), opts, |z| {
        let w = n.apply(z).normalized();
        if w.z1.norm() == 0.0 || w.z2.norm() == 0.0 {
            return Lookup::Undefined;
        }
        let Some((w, _)) = spec.annulus_reduce(w.z1 / w.z2) else {
            return Lookup::Undefined;
        };
        let fx = (w.norm().ln() - lr) / ll * sw as f64 - 0.5;
        let fy = w.arg().rem_euclid(TAU) / TAU * sh as f64 - 0.5;
        Lookup::Linear(strip_bilinear(strip, fx, fy))
    })?;
    SphericalImage::try_from(raster)
}

/// Bilinear sample of a strip: clamped in `x`, periodic in `y`.
fn strip_bilinear(strip: &Raster, fx: f64, fy: f64) -> [f64; 4] {
    let (w, h) = (strip.width(), strip.height());
    let fx = fx.clamp(0.0, (w - 1) as f64);
    let (x0, y0) = (fx.floor(), fy.floor());
    let (tx, ty) = (fx - x0, fy - y0);
    let xa = x0 as usize;
    let xb = (xa + 1).min(w - 1);
    let ya = (y0 as i64).rem_euclid(h as i64) as usize;
    let yb = (ya + 1) % h;
    let mut acc = [0.0; 4];
    for (x, y, wt) in [
        (xa, ya, (1.0 - tx) * (1.0 - ty)),
        (xb, ya, tx * (1.0 - ty)),
        (xa, yb, (1.0 - tx) * ty),
        (xb, yb, tx * ty),
    ] {
        let l = pixel_linear(strip, x, y);
        for c in 0..4 {
            acc[c] += wt * l[c];
        }
    }
    acc
}

fn pixel_linear(r: &Raster, x: usize, y: usize) -> [f64; 4] {
    use crate::raster::to_linear;
    let p = r.pixel(x, y);
    let d = r.depth();
    let a = if r.channels() == 4 { p[3] } else { d.max_value() };
    [to_linear(p[0], d, false), to_linear(p[1], d, false), to_linear(p[2], d, false), to_linear(a, d, true)]
}

fn lookup_linear(l: Lookup, depth: crate::raster::BitDepth) -> [f64; 4] {
    use crate::raster::to_linear;
    match l {
        Lookup::Raw(p) => [
            to_linear(p[0], depth, false),
            to_linear(p[1], depth, false),
            to_linear(p[2], depth, false),
            to_linear(p[3], depth, true),
        ],
        Lookup::Linear(l) => l,
        Lookup::Undefined => [0.0; 4],
    }
}

fn encode(l: [f64; 4], depth: crate::raster::BitDepth) -> [u16; 4] {
    use crate::raster::from_linear;
    [
        from_linear(l[0], depth, false),
        from_linear(l[1], depth, false),
        from_linear(l[2], depth, false),
        from_linear(l[3], depth, true),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::cauchy_riemann_residual;

    fn spec(twist: i32) -> DrosteSpec {
        DrosteSpec::new(ProjectivePoint::ZERO, ProjectivePoint::INFINITY, 4.0, twist, 0.5).unwrap()
    }

    #[test]
    fn reduce_examples() {
        let s = spec(0);
        let z0 = C64::new(0.7, 0.3);
        assert_eq!(s.annulus_reduce(z0), Some((z0, 0)));
        let (z, k) = s.annulus_reduce(z0 * 4.0).unwrap();
        assert_eq!(k, 1);
        assert!((z - z0).norm() < 1e-15);
        assert!(s.annulus_reduce(C64::new(0.0, 0.0)).is_none());
    }

    #[test]
    fn reduce_lands_in_the_annulus() {
        let s = spec(0);
        for i in 0..200 {
            let w = C64::from_polar(10f64.powf(i as f64 / 20.0 - 5.0), i as f64);
            let (z, k) = s.annulus_reduce(w).unwrap();
            assert!(z.norm() >= 0.5 && z.norm() < 2.0);
            assert!((z * 4f64.powi(k as i32) - w).norm() <= 1e-12 * w.norm());
        }
    }

    #[test]
    fn twist_exponent_closes_up() {
        // one turn multiplies w^α by λ^k
        let s = spec(2);
        let turn = (s.alpha() * C64::new(0.0, TAU)).exp();
        assert!((turn - C64::new(16.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn circles_give_concentric_annulus() {
        let inner = Circle { center: C64::new(0.2, 0.1), radius: 0.3 };
        let outer = Circle { center: C64::new(0.0, 0.0), radius: 1.5 };
        let s = DrosteSpec::from_circles(inner, outer, 0).unwrap();
        let n = s.normalization().unwrap();
        for c in [inner, outer] {
            let radii: Vec<f64> = (0..8)
                .map(|i| {
                    let z = c.center + C64::from_polar(c.radius, i as f64);
                    n.apply(ProjectivePoint::finite(z)).affine().unwrap().norm()
                })
                .collect();
            let (lo, hi) = radii.iter().fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
            assert!(hi - lo < 1e-10 * hi);
        }
        assert!(s.lambda > 1.0);
    }

    #[test]
    fn circle_through_points() {
        let c = Circle::through(C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0)).unwrap();
        assert!(c.center.norm() < 1e-15 && (c.radius - 1.0).abs() < 1e-15);
    }

    #[test]
    fn deck_invariance_of_the_map() {
        let m = DrosteMap::new(spec(0)).unwrap();
        let z = ProjectivePoint::finite(C64::new(0.3, -1.7));
        let a = m.eval(z).unwrap();
        let b = m.eval(m.deck(z)).unwrap();
        assert!(a.chordal_distance(&b) < 1e-12);
    }

    #[test]
    fn twisted_map_is_conformal() {
        let m = DrosteMap::new(spec(1)).unwrap();
        for z in [C64::new(0.3, 0.9), C64::new(-2.0, 0.4), C64::new(5.0, -3.0)] {
            let z = ProjectivePoint::finite(z);
            if m.distance_to_singular(z) > 1e-3 {
                assert!(cauchy_riemann_residual(&m, z, 1e-6).unwrap() < 1e-4);
            }
        }
    }
}
