#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sphere_edit::geometry::{stereographic_project, MobiusTransform, ProjectivePoint, SpherePoint};
use sphere_edit::raster::{BitDepth, SphericalImage};
use sphere_edit::rational::RationalMap;
use sphere_edit::C64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn omega() -> C64 {
    C64::from_polar(1.0, std::f64::consts::PI / 3.0)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller
    let (u, v): (f64, f64) = (rng.gen_range(f64::EPSILON..1.0), rng.gen());
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

pub fn random_sphere_point(rng: &mut ChaCha8Rng) -> SpherePoint {
    loop {
        let (u, v, w) = (normal(rng), normal(rng), normal(rng));
        let n = (u * u + v * v + w * w).sqrt();
        if n > 1e-6 {
            return SpherePoint::new(u / n, v / n, w / n);
        }
    }
}

/// Uniformly distributed on the sphere.
pub fn random_point(rng: &mut ChaCha8Rng) -> ProjectivePoint {
    stereographic_project(random_sphere_point(rng))
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    c(normal(rng), normal(rng))
}

/// A random Möbius map with a well-conditioned matrix.
pub fn random_mobius(rng: &mut ChaCha8Rng) -> MobiusTransform {
    loop {
        let (a, b, cc, d) = (random_complex(rng), random_complex(rng), random_complex(rng), random_complex(rng));
        let big = a.norm().max(b.norm()).max(cc.norm()).max(d.norm());
        if (a * d - b * cc).norm() > 1e-2 * big * big {
            return MobiusTransform::new(a, b, cc, d).unwrap();
        }
    }
}

/// 8-bit image whose channels are affine in the sphere coordinates.
pub fn smooth_image(height: usize) -> SphericalImage {
    let mut img = SphericalImage::new(height, 3, BitDepth::Eight).unwrap();
    let w = img.width();
    for y in 0..height {
        for x in 0..w {
            let p = sphere_edit::geometry::stereographic_unproject(sphere_edit::resample::pixel_point(
                x as f64 + 0.5,
                y as f64 + 0.5,
                w,
                height,
            ));
            let ch = |t: f64| (128.0 + 100.0 * t).round() as u16;
            img.put_pixel(x, y, &[ch(p.u), ch(p.v), ch(p.w)]);
        }
    }
    img
}

/// Largest per-channel difference between two rasters of the same shape.
pub fn max_channel_diff(a: &[u16], b: &[u16]) -> u16 {
    a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).max().unwrap_or(0)
}

pub fn gaussian_1_plus_i() -> RationalMap {
    RationalMap::new(vec![c(0.0, -1.0), c(0.0, 0.0), c(0.0, 1.0)], vec![c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]).unwrap()
}

pub fn gaussian_2() -> RationalMap {
    RationalMap::new(
        vec![c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        vec![c(0.0, 0.0), c(4.0, 0.0), c(0.0, 0.0), c(-4.0, 0.0), c(0.0, 0.0)],
    )
    .unwrap()
}

pub fn gaussian_2_plus_i() -> RationalMap {
    RationalMap::new(
        vec![c(1.0, 0.0), c(0.0, 0.0), c(-2.0, 4.0), c(0.0, 0.0), c(-3.0, -4.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(3.0, 4.0), c(0.0, 0.0), c(2.0, -4.0), c(0.0, 0.0), c(-1.0, 0.0)],
    )
    .unwrap()
}

pub fn eisenstein_1_plus_omega() -> RationalMap {
    let z = c(0.0, 0.0);
    RationalMap::new(vec![c(1.0, 0.0), z, z, c(2f64.sqrt(), 0.0)], vec![z, 3.0 * omega(), z, z]).unwrap()
}
