use crate::C64;
use std::fmt;

/// A point of the Riemann sphere as a homogeneous pair `(z1, z2)`, not both zero.
///
/// Two pairs name the same point when `z1·w2 − z2·w1 = 0`. Comparisons go
/// through [`ProjectivePoint::chordal_distance`], which is finite everywhere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectivePoint {
    pub z1: C64,
    pub z2: C64,
}

impl ProjectivePoint {
    pub const ZERO: Self = Self { z1: C64::new(0.0, 0.0), z2: C64::new(1.0, 0.0) };
    pub const ONE: Self = Self { z1: C64::new(1.0, 0.0), z2: C64::new(1.0, 0.0) };
    pub const INFINITY: Self = Self { z1: C64::new(1.0, 0.0), z2: C64::new(0.0, 0.0) };

    /// Builds a pair and rescales it to unit max modulus.
    ///
    /// The pair `(0, 0)` is not a point; it is kept as is and reported by
    /// [`ProjectivePoint::is_valid`].
    pub fn new(z1: C64, z2: C64) -> Self {
        Self { z1, z2 }.normalized()
    }

    pub fn finite(z: C64) -> Self {
        Self { z1: z, z2: C64::new(1.0, 0.0) }
    }

    pub fn real(x: f64) -> Self {
        Self::finite(C64::new(x, 0.0))
    }

    pub fn is_valid(&self) -> bool {
        let m = self.max_modulus();
        m > 0.0 && m.is_finite() && self.z1.is_finite() && self.z2.is_finite()
    }

    pub fn is_infinite(&self) -> bool {
        self.z2 == C64::new(0.0, 0.0) && self.z1 != C64::new(0.0, 0.0)
    }

    fn max_modulus(&self) -> f64 {
        self.z1.norm().max(self.z2.norm())
    }

    /// Rescales so that `max(|z1|, |z2|) = 1`.
    pub fn normalized(self) -> Self {
        let m = self.max_modulus();
        if m > 0.0 && m.is_finite() {
            Self { z1: self.z1 / m, z2: self.z2 / m }
        } else {
            self
        }
    }

    /// The affine value `z1 / z2`, or `None` at infinity.
    pub fn affine(&self) -> Option<C64> {
        if self.z2 == C64::new(0.0, 0.0) {
            None
        } else {
            Some(self.z1 / self.z2)
        }
    }

    /// Chordal distance on the unit sphere: 2 for antipodes, 0 for equal points.
    pub fn chordal_distance(&self, other: &Self) -> f64 {
        let a = self.normalized();
        let b = other.normalized();
        let cross = (a.z1 * b.z2 - a.z2 * b.z1).norm();
        let na = a.z1.norm().hypot(a.z2.norm());
        let nb = b.z1.norm().hypot(b.z2.norm());
        2.0 * cross / (na * nb)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.chordal_distance(other) < tol
    }

    /// The point reflected through the real axis, `z ↦ z̄`.
    pub fn conj(&self) -> Self {
        Self { z1: self.z1.conj(), z2: self.z2.conj() }
    }
}

impl From<C64> for ProjectivePoint {
    fn from(z: C64) -> Self {
        Self::finite(z)
    }
}

impl fmt::Display for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.affine() {
            None => write!(f, "inf"),
            Some(z) => write!(f, "{z}"),
        }
    }
}
