//! Points of the Riemann sphere and the Möbius group acting on them.
//!
//! Everything is carried as homogeneous pairs `(z1, z2)`, so the point at
//! infinity is the ordinary pair `(1, 0)` and no operation needs a special
//! case for it. The affine value `z1 / z2` is only formed where a special
//! function needs it.

mod mobius;
mod projective;
mod sphere;

pub use mobius::{MobiusClass, MobiusTransform, Orientation};
pub use projective::ProjectivePoint;
pub use sphere::{
    equirect_to_sphere, sphere_to_equirect, stereographic_project, stereographic_unproject,
    EquirectCoord, SpherePoint,
};
