//! A procedural equirectangular test pattern.
//!
//! Layers, bottom to top: a tint per octant (so every mirror or rotation of
//! the frame is visible), a 30° graticule, a blue equator band, a red prime
//! meridian, orange disks at the graticule crossings, and two polar caps:
//! magenta around `0` (south pole) and cyan around `∞` (north pole).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{equirect_to_sphere, EquirectCoord, SpherePoint};
use crate::raster::{BitDepth, Rgb8, SphericalImage};
use crate::resample::pixel_to_coord;

pub const GRATICULE: Rgb8 = [40, 40, 40];
pub const EQUATOR: Rgb8 = [0, 0, 255];
pub const MERIDIAN: Rgb8 = [255, 0, 0];
pub const DOT: Rgb8 = [255, 140, 0];
/// Cap around `0`, the south pole.
pub const SOUTH_CAP: Rgb8 = [255, 0, 255];
/// Cap around `∞`, the north pole.
pub const NORTH_CAP: Rgb8 = [0, 255, 255];
/// Angular radius of both polar caps, in degrees.
pub const CAP_RADIUS_DEG: f64 = 10.0;

const TINTS: [Rgb8; 8] = [
    [235, 225, 200],
    [200, 230, 205],
    [205, 215, 240],
    [240, 205, 215],
    [170, 160, 130],
    [130, 170, 140],
    [140, 150, 185],
    [185, 140, 150],
];

/// Color of the pattern at a coordinate.
pub fn pattern_color(c: EquirectCoord) -> Rgb8 {
    let deg = 180.0 / PI;
    let p = equirect_to_sphere(c);
    let from_south = p.angle_to(&SpherePoint::SOUTH) * deg;
    let from_north = p.angle_to(&SpherePoint::NORTH) * deg;
    if from_south < CAP_RADIUS_DEG {
        return SOUTH_CAP;
    }
    if from_north < CAP_RADIUS_DEG {
        return NORTH_CAP;
    }
    let (lon, lat) = (c.theta * deg, c.phi * deg);
    // graticule crossings away from the caps
    for j in -2..=2 {
        for i in 0..12 {
            let q = equirect_to_sphere(EquirectCoord::new(i as f64 * PI / 6.0, j as f64 * PI / 6.0));
            if p.angle_to(&q) * deg < 3.0 {
                return DOT;
            }
        }
    }
    let lon_dist = (lon - 360.0 * (lon / 360.0).round()).abs();
    if lon_dist * c.phi.cos() < 1.0 {
        return MERIDIAN;
    }
    if lat.abs() < 1.5 {
        return EQUATOR;
    }
    let near = |v: f64| (v - 30.0 * (v / 30.0).round()).abs();
    if near(lat) < 0.6 || near(lon) * c.phi.cos() < 0.6 {
        return GRATICULE;
    }
    let quadrant = ((lon / 90.0).floor() as usize).min(3);
    TINTS[quadrant + if lat < 0.0 { 4 } else { 0 }]
}

/// The pattern at `height` rows (width `2·height`), 8-bit RGB.
pub fn generate_test_pattern(height: usize) -> Result<SphericalImage> {
    if height < 64 {
        return Err(Error::InvalidParameter(format!("test pattern needs height ≥ 64, got {height}")));
    }
    let mut img = SphericalImage::new(height, 3, BitDepth::Eight)?;
    let w = img.width();
    for y in 0..height {
        for x in 0..w {
            let c = pattern_color(pixel_to_coord(x as f64 + 0.5, y as f64 + 0.5, w, height));
            img.put_pixel(x, y, &[c[0] as u16, c[1] as u16, c[2] as u16]);
        }
    }
    Ok(img)
}
