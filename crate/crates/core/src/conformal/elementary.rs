use super::SphereMap;
use crate::geometry::ProjectivePoint;
use crate::C64;

/// `S(z) = zⁿ`, branched of order `n` over `0` and `∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerMap {
    pub n: u32,
}

impl PowerMap {
    pub fn new(n: u32) -> Self {
        Self { n }
    }
}

/// Projective `n`-th power `(z1ⁿ, z2ⁿ)`.
pub fn power_map(z: ProjectivePoint, n: u32) -> ProjectivePoint {
    let z = z.normalized();
    ProjectivePoint::new(z.z1.powu(n), z.z2.powu(n))
}

impl SphereMap for PowerMap {
    fn eval(&self, z: ProjectivePoint) -> Option<ProjectivePoint> {
        Some(power_map(z, self.n))
    }

    fn singular_points(&self) -> Vec<ProjectivePoint> {
        vec![ProjectivePoint::ZERO, ProjectivePoint::INFINITY]
    }
}

/// `S(z) = −exp(−λ(1 + z)/(1 − z))`: a quarter turn about `±i` carries `±1`
/// to `0, ∞`, and the exponential wraps the plane around them infinitely
/// often.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpStripMap {
    pub lambda: f64,
}

impl ExpStripMap {
    pub fn new(lambda: f64) -> Self {
        Self { lambda }
    }
}

/// `−exp(−λ(1 + z)/(1 − z))`, or `None` at the essential singularity `z = 1`.
pub fn exp_strip_map(z: ProjectivePoint, lambda: f64) -> Option<ProjectivePoint> {
    let z = z.normalized();
    let den = z.z2 - z.z1;
    if den.norm() < 1e-15 {
        return None;
    }
    let e = -lambda * (z.z1 + z.z2) / den;
    if !e.is_finite() {
        return None;
    }
    // −e^{r + iθ}: keep the pair bounded whichever way r points
    let phase = -C64::from_polar(1.0, e.im);
    Some(if e.re > 0.0 {
        ProjectivePoint::new(phase, C64::new((-e.re).exp(), 0.0))
    } else {
        ProjectivePoint::new(phase * e.re.exp(), C64::new(1.0, 0.0))
    })
}

impl SphereMap for ExpStripMap {
    fn eval(&self, z: ProjectivePoint) -> Option<ProjectivePoint> {
        exp_strip_map(z, self.lambda)
    }

    fn singular_points(&self) -> Vec<ProjectivePoint> {
        vec![ProjectivePoint::ONE]
    }
}
