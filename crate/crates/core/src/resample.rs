//! The pull-back renderer.
//!
//! Each output pixel is mapped to the sphere, sent through the map, and the
//! input is sampled where it lands. Averaging (bilinear taps, supersamples)
//! is done in linear light. Rows are rendered in parallel; every pixel is a
//! pure function of its coordinates, so the output does not depend on the
//! number of workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::conformal::SphereMap;
use crate::error::{Error, Result};
use crate::geometry::{
    equirect_to_sphere, sphere_to_equirect, stereographic_project, stereographic_unproject, EquirectCoord,
    ProjectivePoint, SpherePoint,
};
use crate::raster::{from_linear, to_linear, BitDepth, Raster, Rgb8, SphericalImage};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Filter {
    Nearest,
    #[default]
    Bilinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleOptions {
    pub filter: Filter,
    /// Samples per pixel along each axis, 1 to 8.
    pub supersample: u32,
    /// Color for pixels where the map is undefined.
    pub undefined_color: Rgb8,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self { filter: Filter::Bilinear, supersample: 1, undefined_color: [128, 128, 128] }
    }
}

impl SampleOptions {
    pub fn nearest() -> Self {
        Self { filter: Filter::Nearest, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=8).contains(&self.supersample) {
            return Err(Error::InvalidParameter(format!(
                "supersample must be in 1..=8, got {}",
                self.supersample
            )));
        }
        Ok(())
    }
}

/// Angles of a position in pixel units; pixel `(x, y)` covers
/// `[x, x+1) × [y, y+1)` and its centre is `(x + 0.5, y + 0.5)`.
pub fn pixel_to_coord(px: f64, py: f64, width: usize, height: usize) -> EquirectCoord {
    EquirectCoord::new(TAU * px / width as f64, FRAC_PI_2 - PI * py / height as f64)
}

/// Fractional pixel index of a coordinate, with pixel centres at integers.
pub fn coord_to_pixel(c: EquirectCoord, width: usize, height: usize) -> (f64, f64) {
    (c.theta * width as f64 / TAU - 0.5, (FRAC_PI_2 - c.phi) * height as f64 / PI - 0.5)
}

/// The point of `Ĉ` at a pixel-unit position.
pub fn pixel_point(px: f64, py: f64, width: usize, height: usize) -> ProjectivePoint {
    stereographic_project(equirect_to_sphere(pixel_to_coord(px, py, width, height)))
}

/// Fractional pixel index of a point of `Ĉ`.
pub fn point_to_pixel(z: ProjectivePoint, width: usize, height: usize) -> (f64, f64) {
    coord_to_pixel(sphere_to_equirect(stereographic_unproject(z)), width, height)
}

/// The four bilinear taps `(x, y, weight)` around a fractional pixel index,
/// wrapping in longitude and clamping in latitude.
pub fn bilinear_taps(fx: f64, fy: f64, width: usize, height: usize) -> [(usize, usize, f64); 4] {
    let x0 = fx.floor();
    let tx = fx - x0;
    let fy = fy.clamp(0.0, (height - 1) as f64);
    let y0 = fy.floor();
    let ty = fy - y0;
    let wrap = |x: f64| (x as i64).rem_euclid(width as i64) as usize;
    let (xa, xb) = (wrap(x0), wrap(x0 + 1.0));
    let ya = y0 as usize;
    let yb = (ya + 1).min(height - 1);
    [
        (xa, ya, (1.0 - tx) * (1.0 - ty)),
        (xb, ya, tx * (1.0 - ty)),
        (xa, yb, (1.0 - tx) * ty),
        (xb, yb, tx * ty),
    ]
}

/// Nearest pixel to a fractional index.
pub fn nearest_pixel(fx: f64, fy: f64, width: usize, height: usize) -> (usize, usize) {
    let x = ((fx + 0.5).floor() as i64).rem_euclid(width as i64) as usize;
    let y = ((fy + 0.5).floor() as i64).clamp(0, height as i64 - 1) as usize;
    (x, y)
}

/// The result of looking up one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lookup {
    /// Stored values of a single source pixel.
    Raw([u16; 4]),
    /// A linear-light color.
    Linear([f64; 4]),
    /// No value; painted with the undefined color.
    Undefined,
}

fn raw_pixel(img: &Raster, x: usize, y: usize) -> [u16; 4] {
    let p = img.pixel(x, y);
    let alpha = if img.channels() == 4 { p[3] } else { img.depth().max_value() };
    [p[0], p[1], p[2], alpha]
}

fn linearize(px: [u16; 4], depth: BitDepth) -> [f64; 4] {
    [
        to_linear(px[0], depth, false),
        to_linear(px[1], depth, false),
        to_linear(px[2], depth, false),
        to_linear(px[3], depth, true),
    ]
}

/// Samples `img` at a fractional pixel index.
pub fn sample_at(img: &SphericalImage, fx: f64, fy: f64, filter: Filter) -> Lookup {
    let (w, h) = (img.width(), img.height());
    match filter {
        Filter::Nearest => {
            let (x, y) = nearest_pixel(fx, fy, w, h);
            Lookup::Raw(raw_pixel(img, x, y))
        }
        Filter::Bilinear => {
            let mut acc = [0.0; 4];
            for (x, y, wt) in bilinear_taps(fx, fy, w, h) {
                if wt == 0.0 {
                    continue;
                }
                let l = linearize(raw_pixel(img, x, y), img.depth());
                for c in 0..4 {
                    acc[c] += wt * l[c];
                }
            }
            Lookup::Linear(acc)
        }
    }
}

/// Samples `img` at an equirectangular coordinate.
pub fn sample(img: &SphericalImage, c: EquirectCoord, filter: Filter) -> Lookup {
    let (fx, fy) = coord_to_pixel(c, img.width(), img.height());
    sample_at(img, fx, fy, filter)
}

/// Samples `img` at a point of `Ĉ`.
pub fn sample_point(img: &SphericalImage, z: ProjectivePoint, filter: Filter) -> Lookup {
    if !z.is_valid() {
        return Lookup::Undefined;
    }
    let (fx, fy) = point_to_pixel(z, img.width(), img.height());
    sample_at(img, fx, fy, filter)
}

/// Renders a `width × height` raster by calling `lookup` at each (sub)sample
/// point of `Ĉ` and averaging in linear light.
///
/// With one sample per pixel a [`Lookup::Raw`] result is written unchanged.
pub fn render<F>(
    width: usize,
    height: usize,
    channels: usize,
    depth: BitDepth,
    opts: &SampleOptions,
    lookup: F,
) -> Result<Raster>
where
    F: Fn(ProjectivePoint) -> Lookup + Sync,
{
    opts.validate()?;
    let mut out = Raster::new(width, height, channels, depth)?;
    let k = opts.supersample as usize;
    let undefined = {
        let c = opts.undefined_color;
        let raw = [c[0] as u16, c[1] as u16, c[2] as u16, 255];
        linearize(raw, BitDepth::Eight)
    };
    let encode = |l: [f64; 4]| -> [u16; 4] {
        [
            from_linear(l[0], depth, false),
            from_linear(l[1], depth, false),
            from_linear(l[2], depth, false),
            from_linear(l[3], depth, true),
        ]
    };
    out.data_mut()
        .par_chunks_mut(width * channels)
        .enumerate()
        .for_each(|(y, row)| {
            for x in 0..width {
                let px = if k == 1 {
                    let z = pixel_point(x as f64 + 0.5, y as f64 + 0.5, width, height);
                    match lookup(z) {
                        Lookup::Raw(p) => p,
                        Lookup::Linear(l) => encode(l),
                        Lookup::Undefined => encode(undefined),
                    }
                } else {
                    let mut acc = [0.0; 4];
                    for j in 0..k {
                        for i in 0..k {
                            let sx = x as f64 + (i as f64 + 0.5) / k as f64;
                            let sy = y as f64 + (j as f64 + 0.5) / k as f64;
                            let l = match lookup(pixel_point(sx, sy, width, height)) {
                                Lookup::Raw(p) => linearize(p, depth),
                                Lookup::Linear(l) => l,
                                Lookup::Undefined => undefined,
                            };
                            for c in 0..4 {
                                acc[c] += l[c];
                            }
                        }
                    }
                    let n = (k * k) as f64;
                    encode(acc.map(|v| v / n))
                };
                row[x * channels..(x + 1) * channels].copy_from_slice(&px[..channels]);
            }
        });
    Ok(out)
}

/// Pulls `input` back through `map`: the output pixel at `z` shows the input
/// at `map(z)`. Output has the input's size and format.
pub fn pull_back(input: &SphericalImage, map: &dyn SphereMap, opts: &SampleOptions) -> Result<SphericalImage> {
    pull_back_sized(input, map, opts, input.height())
}

/// [`pull_back`] into an output of the given height.
pub fn pull_back_sized(
    input: &SphericalImage,
    map: &dyn SphereMap,
    opts: &SampleOptions,
    height: usize,
) -> Result<SphericalImage> {
    let raster = render(2 * height, height, input.channels(), input.depth(), opts, |z| match map.eval(z) {
        Some(w) => sample_point(input, w, opts.filter),
        None => Lookup::Undefined,
    })?;
    SphericalImage::try_from(raster)
}

/// A part of the sphere, used to route output pixels to sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Region {
    All,
    /// Points whose unit vector has nonnegative dot product with `pole`.
    Hemisphere { pole: [f64; 3] },
    /// `|z − center| < radius` in the plane.
    Disk { center: C64, radius: f64 },
    /// The complement of a planar disk, including `∞`.
    OutsideDisk { center: C64, radius: f64 },
}

impl Region {
    pub fn contains(&self, z: ProjectivePoint) -> bool {
        match self {
            Region::All => true,
            Region::Hemisphere { pole } => {
                let p = stereographic_unproject(z);
                let n = SpherePoint::new(pole[0], pole[1], pole[2]);
                p.dot(&n) >= 0.0
            }
            Region::Disk { center, radius } => (z.z1 - center * z.z2).norm() < radius * z.z2.norm(),
            Region::OutsideDisk { center, radius } => (z.z1 - center * z.z2).norm() >= radius * z.z2.norm(),
        }
    }
}

/// One input to [`composite_pull_back`].
pub struct Source<'a> {
    pub region: Region,
    pub map: &'a dyn SphereMap,
    pub image: &'a SphericalImage,
}

/// Pulls back several sources into one image. Each output sample uses the
/// first source whose region contains it; uncovered samples get the
/// undefined color. Output takes the size and format of the first source.
pub fn composite_pull_back(sources: &[Source<'_>], opts: &SampleOptions) -> Result<SphericalImage> {
    let first = sources
        .first()
        .ok_or_else(|| Error::InvalidParameter("composite needs at least one source".into()))?;
    let (h, ch, depth) = (first.image.height(), first.image.channels(), first.image.depth());
    let raster = render(2 * h, h, ch, depth, opts, |z| {
        let Some(src) = sources.iter().find(|s| s.region.contains(z)) else {
            return Lookup::Undefined;
        };
        match src.map.eval(z) {
            Some(w) => match sample_point(src.image, w, opts.filter) {
                // mixed formats go through linear light
                Lookup::Raw(p) if src.image.depth() != depth => Lookup::Linear(linearize(p, src.image.depth())),
                l => l,
            },
            None => Lookup::Undefined,
        }
    })?;
    SphericalImage::try_from(raster)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MobiusTransform;

    fn ramp(height: usize) -> SphericalImage {
        let mut img = SphericalImage::new(height, 3, BitDepth::Eight).unwrap();
        let w = img.width();
        for y in 0..height {
            for x in 0..w {
                img.put_pixel(x, y, &[(x * 7 % 256) as u16, (y * 13 % 256) as u16, ((x + y) % 256) as u16]);
            }
        }
        img
    }

    #[test]
    fn pixel_centres_round_trip() {
        let (w, h) = (64, 32);
        for (x, y) in [(0, 0), (17, 5), (63, 31), (31, 16)] {
            let z = pixel_point(x as f64 + 0.5, y as f64 + 0.5, w, h);
            let (fx, fy) = point_to_pixel(z, w, h);
            assert!((fx - x as f64).abs() < 1e-9 && (fy - y as f64).abs() < 1e-9, "{x},{y}: {fx},{fy}");
        }
    }

    #[test]
    fn bilinear_at_centre_is_exact() {
        let img = ramp(16);
        let Lookup::Linear(l) = sample_at(&img, 5.0, 3.0, Filter::Bilinear) else { panic!() };
        let expect = linearize(raw_pixel(&img, 5, 3), BitDepth::Eight);
        assert_eq!(l, expect);
    }

    #[test]
    fn bilinear_halfway_is_the_mean() {
        let img = ramp(16);
        let Lookup::Linear(l) = sample_at(&img, 5.5, 3.0, Filter::Bilinear) else { panic!() };
        let a = linearize(raw_pixel(&img, 5, 3), BitDepth::Eight);
        let b = linearize(raw_pixel(&img, 6, 3), BitDepth::Eight);
        for c in 0..3 {
            assert!((l[c] - 0.5 * (a[c] + b[c])).abs() < 1e-15);
        }
    }

    #[test]
    fn bilinear_wraps_the_seam() {
        let img = ramp(16);
        let taps = bilinear_taps(31.5, 4.0, 32, 16);
        assert_eq!((taps[0].0, taps[1].0), (31, 0));
        let Lookup::Linear(l) = sample_at(&img, 31.5, 4.0, Filter::Bilinear) else { panic!() };
        let a = linearize(raw_pixel(&img, 31, 4), BitDepth::Eight);
        let b = linearize(raw_pixel(&img, 0, 4), BitDepth::Eight);
        assert!((l[0] - 0.5 * (a[0] + b[0])).abs() < 1e-15);
    }

    #[test]
    fn identity_is_byte_identical() {
        let img = ramp(32);
        let out = pull_back(&img, &MobiusTransform::IDENTITY, &SampleOptions::nearest()).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn half_turn_shifts_by_half_width() {
        let img = ramp(32);
        let out = pull_back(&img, &MobiusTransform::rotation(PI), &SampleOptions::nearest()).unwrap();
        let w = img.width();
        for y in 0..img.height() {
            for x in 0..w {
                assert_eq!(out.pixel(x, y), img.pixel((x + w / 2) % w, y));
            }
        }
    }

    #[test]
    fn undefined_points_get_the_sentinel() {
        struct Nowhere;
        impl SphereMap for Nowhere {
            fn eval(&self, _: ProjectivePoint) -> Option<ProjectivePoint> {
                None
            }
        }
        let img = ramp(8);
        let opts = SampleOptions { undefined_color: [1, 2, 3], ..SampleOptions::default() };
        let out = pull_back(&img, &Nowhere, &opts).unwrap();
        assert_eq!(out.pixel(3, 3), &[1, 2, 3]);
    }

    #[test]
    fn rejects_bad_supersample() {
        let img = ramp(8);
        let opts = SampleOptions { supersample: 9, ..SampleOptions::default() };
        assert!(pull_back(&img, &MobiusTransform::IDENTITY, &opts).is_err());
    }

    #[test]
    fn regions() {
        let z = ProjectivePoint::finite(C64::new(0.5, 0.0));
        assert!(Region::Disk { center: C64::new(0.0, 0.0), radius: 1.0 }.contains(z));
        assert!(!Region::Disk { center: C64::new(0.0, 0.0), radius: 1.0 }.contains(ProjectivePoint::INFINITY));
        assert!(Region::OutsideDisk { center: C64::new(0.0, 0.0), radius: 1.0 }.contains(ProjectivePoint::INFINITY));
        assert!(Region::Hemisphere { pole: [1.0, 0.0, 0.0] }.contains(z));
        assert!(!Region::Hemisphere { pole: [-1.0, 0.0, 0.0] }.contains(z));
    }
}
