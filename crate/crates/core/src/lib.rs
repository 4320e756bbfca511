//! Conformal editing of equirectangular spherical images.
//!
//! Points of the sphere are handled as homogeneous pairs
//! ([`geometry::ProjectivePoint`]); images are transformed by pulling back
//! through maps of the Riemann sphere ([`conformal::SphereMap`]).

pub mod conformal;
pub mod droste;
pub mod error;
pub mod geometry;
pub mod pattern;
pub mod poly;
pub mod rational;
pub mod raster;
pub mod resample;
pub mod schottky;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
