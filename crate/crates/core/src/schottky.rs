//! Self-similar images from Schottky groups.
//!
//! Generators `A` (and optionally `B`) pair disks: `A` carries the outside
//! of `D_a` onto `D_A`. Each output pixel starts at its own point `q`; while
//! `q` lies in one of the four disks it is moved out by the generator that
//! empties that disk, and once it reaches the black region the input is
//! sampled there.
//!
//! Regions come from a color mask (red `D_a`, green `D_b`, white `D_A`,
//! blue `D_B`, anything else black) or from exact circle equations.

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::geometry::{stereographic_unproject, MobiusClass, MobiusTransform, ProjectivePoint};
use crate::raster::{Rgb8, SphericalImage};
use crate::resample::{nearest_pixel, point_to_pixel, render, sample_point, Lookup, SampleOptions};

/// Mask label of a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MaskRegion {
    Black,
    /// `D_a`, red.
    DiskLowerA,
    /// `D_b`, green.
    DiskLowerB,
    /// `D_A`, white.
    DiskUpperA,
    /// `D_B`, blue.
    DiskUpperB,
}

impl MaskRegion {
    pub fn color(self) -> Rgb8 {
        match self {
            MaskRegion::Black => [0, 0, 0],
            MaskRegion::DiskLowerA => [255, 0, 0],
            MaskRegion::DiskLowerB => [0, 255, 0],
            MaskRegion::DiskUpperA => [255, 255, 255],
            MaskRegion::DiskUpperB => [0, 0, 255],
        }
    }
}

const CANONICAL: [MaskRegion; 5] = [
    MaskRegion::Black,
    MaskRegion::DiskLowerA,
    MaskRegion::DiskLowerB,
    MaskRegion::DiskUpperA,
    MaskRegion::DiskUpperB,
];

/// Nearest canonical mask color within 64 per channel; black otherwise.
pub fn classify_mask_pixel(c: Rgb8) -> MaskRegion {
    CANONICAL
        .iter()
        .copied()
        .filter(|r| r.color().iter().zip(c).all(|(&a, b)| (a as i32 - b as i32).abs() <= 64))
        .min_by_key(|r| r.color().iter().zip(c).map(|(&a, b)| (a as i32 - b as i32).pow(2)).sum::<i32>())
        .unwrap_or(MaskRegion::Black)
}

/// `{z : |chart(z)| < radius}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub chart: MobiusTransform,
    pub radius: f64,
}

impl Disk {
    /// The planar disk `|z − center| < radius`.
    pub fn planar(center: crate::C64, radius: f64) -> Self {
        Disk { chart: MobiusTransform::translation(-center), radius }
    }

    pub fn contains(&self, z: ProjectivePoint) -> bool {
        let w = self.chart.apply(z);
        w.z1.norm() < self.radius * w.z2.norm()
    }

    /// `g(Ĉ − self)`, itself a disk.
    pub fn image_of_complement(&self, g: &MobiusTransform) -> Disk {
        let flip = MobiusTransform::from_real(0.0, 1.0, 1.0, 0.0).expect("z ↦ 1/z");
        Disk { chart: flip.compose(&self.chart).compose(&g.inverse()), radius: 1.0 / self.radius }
    }
}

/// Where region membership comes from.
#[derive(Debug, Clone)]
pub enum Regions {
    /// A five-color mask, looked up at the nearest mask pixel.
    Mask(SphericalImage),
    /// Exact disks; `D_A` and `D_B` are derived from `D_a`, `D_b`.
    Disks { a: Disk, b: Option<Disk> },
}

/// Generators, regions, and iteration policy.
#[derive(Debug, Clone)]
pub struct SchottkyConfig {
    pub a: MobiusTransform,
    pub b: Option<MobiusTransform>,
    pub regions: Regions,
    pub max_iter: usize,
    /// Color for pixels still inside a disk after `max_iter` steps.
    pub sentinel: Rgb8,
}

impl SchottkyConfig {
    pub fn new(a: MobiusTransform, b: Option<MobiusTransform>, regions: Regions) -> Self {
        Self { a, b, regions, max_iter: 100, sentinel: [0, 0, 0] }
    }

    /// Checks the generator classes and, for exact disks, that the four
    /// disks are pairwise disjoint (sampled on a grid of the sphere).
    pub fn validate(&self) -> Result<()> {
        for (name, g) in [("A", Some(self.a)), ("B", self.b)] {
            if let Some(g) = g {
                let class = g.classify();
                if !matches!(class, MobiusClass::Hyperbolic | MobiusClass::Loxodromic) {
                    return Err(Error::NotHyperbolic(name, class));
                }
            }
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        if let Regions::Disks { .. } = self.regions {
            let h = 128;
            let mut overlap = 0;
            for y in 0..h {
                for x in 0..2 * h {
                    let z = crate::resample::pixel_point(x as f64 + 0.5, y as f64 + 0.5, 2 * h, h);
                    if self.memberships(z).len() > 1 {
                        overlap += 1;
                    }
                }
            }
            if overlap > 0 {
                return Err(Error::RegionsOverlap(overlap));
            }
        }
        if let Regions::Mask(mask) = &self.regions {
            if self.b.is_none() {
                let stray = (0..mask.height())
                    .flat_map(|y| (0..mask.width()).map(move |x| (x, y)))
                    .any(|(x, y)| {
                        matches!(
                            classify_mask_pixel(mask.rgb8(x, y)),
                            MaskRegion::DiskLowerB | MaskRegion::DiskUpperB
                        )
                    });
                if stray {
                    return Err(Error::InvalidParameter("mask has D_b/D_B pixels but no generator B".into()));
                }
            }
        }
        Ok(())
    }

    fn exact_disks(&self) -> Vec<(MaskRegion, Disk)> {
        let Regions::Disks { a, b } = &self.regions else { return Vec::new() };
        let mut out = vec![(MaskRegion::DiskLowerA, *a), (MaskRegion::DiskUpperA, a.image_of_complement(&self.a))];
        if let (Some(b), Some(gb)) = (b, self.b) {
            out.push((MaskRegion::DiskLowerB, *b));
            out.push((MaskRegion::DiskUpperB, b.image_of_complement(&gb)));
        }
        out
    }

    fn memberships(&self, z: ProjectivePoint) -> Vec<MaskRegion> {
        self.exact_disks().into_iter().filter(|(_, d)| d.contains(z)).map(|(r, _)| r).collect()
    }

    /// Region containing `z`.
    pub fn region(&self, z: ProjectivePoint) -> MaskRegion {
        match &self.regions {
            Regions::Mask(mask) => {
                let (fx, fy) = point_to_pixel(z, mask.width(), mask.height());
                let (x, y) = nearest_pixel(fx, fy, mask.width(), mask.height());
                classify_mask_pixel(mask.rgb8(x, y))
            }
            Regions::Disks { .. } => self.memberships(z).first().copied().unwrap_or(MaskRegion::Black),
        }
    }

    /// The generator that empties a region: `A` on `D_a`, `a = A⁻¹` on `D_A`,
    /// and likewise for `B`.
    fn step(&self, region: MaskRegion) -> Option<MobiusTransform> {
        match region {
            MaskRegion::Black => None,
            MaskRegion::DiskLowerA => Some(self.a),
            MaskRegion::DiskUpperA => Some(self.a.inverse()),
            MaskRegion::DiskLowerB => self.b,
            MaskRegion::DiskUpperB => self.b.map(|b| b.inverse()),
        }
    }
}

/// Result of running the escape routine from one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Escape {
    /// Reached the black region at this point after this many steps.
    Escaped(ProjectivePoint, usize),
    /// Still inside a disk after `max_iter` steps.
    Capped,
    /// Returned exactly to an earlier (region, point) state.
    Cycle,
}

/// The disk emptied by the inverse of the generator used on `r`.
fn partner(r: MaskRegion) -> MaskRegion {
    match r {
        MaskRegion::Black => MaskRegion::Black,
        MaskRegion::DiskLowerA => MaskRegion::DiskUpperA,
        MaskRegion::DiskUpperA => MaskRegion::DiskLowerA,
        MaskRegion::DiskLowerB => MaskRegion::DiskUpperB,
        MaskRegion::DiskUpperB => MaskRegion::DiskLowerB,
    }
}

/// The escape routine for one starting point.
///
/// Escape words are reduced: a step is never undone by the next one. With
/// exact disks this cannot arise; with a raster mask it happens only where
/// a point lands one pixel across a disk boundary, and such a point is
/// treated as having reached the black region.
pub fn escape(cfg: &SchottkyConfig, z: ProjectivePoint) -> Escape {
    let mut q = z;
    let mut seen: HashSet<(MaskRegion, [i64; 3])> = HashSet::new();
    let mut last: Option<(MaskRegion, [i64; 3])> = None;
    let mut previous = MaskRegion::Black;
    for k in 0..=cfg.max_iter {
        let region = cfg.region(q);
        let Some(g) = cfg.step(region) else {
            return Escape::Escaped(q, k);
        };
        if k > 0 && region == partner(previous) {
            return Escape::Escaped(q, k);
        }
        if k == cfg.max_iter {
            break;
        }
        let p = stereographic_unproject(q);
        let key = (region, [p.u, p.v, p.w].map(|c| (c * 1e9).round() as i64));
        if Some(key) != last && !seen.insert(key) {
            return Escape::Cycle;
        }
        last = Some(key);
        previous = region;
        q = g.apply(q);
    }
    Escape::Capped
}

/// Image plus escape statistics.
#[derive(Debug, Clone)]
pub struct SchottkyRender {
    pub image: SphericalImage,
    /// Samples that hit `max_iter`.
    pub capped: usize,
    pub samples: usize,
}

impl SchottkyRender {
    pub fn terminated_fraction(&self) -> f64 {
        1.0 - self.capped as f64 / self.samples as f64
    }
}

/// Renders `input` through the Schottky escape routine.
///
/// Fails with `EscapeCycle` when any sample returns to an earlier state,
/// which only happens for inconsistent regions.
pub fn schottky_render(input: &SphericalImage, cfg: &SchottkyConfig, opts: &SampleOptions) -> Result<SchottkyRender> {
    cfg.validate()?;
    let capped = AtomicUsize::new(0);
    let cycle: Mutex<Option<(usize, usize)>> = Mutex::new(None);
    let sentinel = {
        let c = cfg.sentinel;
        Lookup::Raw(input.color_from_rgb8(c))
    };
    let (w, h) = (input.width(), input.height());
    let raster = render(w, h, input.channels(), input.depth(), opts, |z| match escape(cfg, z) {
        Escape::Escaped(q, _) => sample_point(input, q, opts.filter),
        Escape::Capped => {
            capped.fetch_add(1, Ordering::Relaxed);
            sentinel
        }
        Escape::Cycle => {
            let (fx, fy) = point_to_pixel(z, w, h);
            let px = nearest_pixel(fx, fy, w, h);
            cycle.lock().expect("unpoisoned").get_or_insert(px);
            sentinel
        }
    })?;
    if let Some((x, y)) = *cycle.lock().expect("unpoisoned") {
        return Err(Error::EscapeCycle { x, y });
    }
    let k = opts.supersample as usize;
    Ok(SchottkyRender {
        image: SphericalImage::try_from(raster)?,
        capped: capped.into_inner(),
        samples: w * h * k * k,
    })
}

/// Completes a red/green mask with `D_A = A(Ĉ − D_a)` in white and
/// `D_B = B(Ĉ − D_b)` in blue.
///
/// A pixel `p` is in `D_A` exactly when `a(p)` is outside `D_a`. Fails with
/// `RegionsOverlap` when more than `tolerance` pixels land in two regions.
pub fn derive_disk_regions(
    mask_ab: &SphericalImage,
    a: &MobiusTransform,
    b: Option<&MobiusTransform>,
    tolerance: usize,
) -> Result<SphericalImage> {
    let (w, h) = (mask_ab.width(), mask_ab.height());
    let label = |z: ProjectivePoint| {
        let (fx, fy) = point_to_pixel(z, w, h);
        let (x, y) = nearest_pixel(fx, fy, w, h);
        classify_mask_pixel(mask_ab.rgb8(x, y))
    };
    let count = |r: MaskRegion| {
        (0..h).flat_map(|y| (0..w).map(move |x| (x, y))).filter(|&(x, y)| classify_mask_pixel(mask_ab.rgb8(x, y)) == r).count()
    };
    if count(MaskRegion::DiskLowerA) == 0 {
        return Err(Error::InvalidParameter("mask has no red D_a pixels".into()));
    }
    if b.is_some() && count(MaskRegion::DiskLowerB) == 0 {
        return Err(Error::InvalidParameter("mask has no green D_b pixels".into()));
    }
    let a_inv = a.inverse();
    let b_inv = b.map(|b| b.inverse());
    let mut out = SphericalImage::filled(h, mask_ab.depth(), [0, 0, 0])?;
    let mut overlap = 0;
    for y in 0..h {
        for x in 0..w {
            let z = crate::resample::pixel_point(x as f64 + 0.5, y as f64 + 0.5, w, h);
            let mut regions = Vec::with_capacity(2);
            let own = classify_mask_pixel(mask_ab.rgb8(x, y));
            if matches!(own, MaskRegion::DiskLowerA | MaskRegion::DiskLowerB) {
                regions.push(own);
            }
            if label(a_inv.apply(z)) != MaskRegion::DiskLowerA {
                regions.push(MaskRegion::DiskUpperA);
            }
            if let Some(b_inv) = b_inv {
                if label(b_inv.apply(z)) != MaskRegion::DiskLowerB {
                    regions.push(MaskRegion::DiskUpperB);
                }
            }
            if regions.len() > 1 {
                overlap += 1;
            }
            if let Some(r) = regions.first() {
                let px = out.color_from_rgb8(r.color());
                out.put_pixel(x, y, &px);
            }
        }
    }
    if overlap > tolerance {
        return Err(Error::RegionsOverlap(overlap));
    }
    Ok(out)
}

/// Paints exact disks into a red/green mask of the given height.
pub fn paint_disks(height: usize, a: &Disk, b: Option<&Disk>) -> Result<SphericalImage> {
    let mut out = SphericalImage::filled(height, crate::raster::BitDepth::Eight, [0, 0, 0])?;
    let w = out.width();
    for y in 0..height {
        for x in 0..w {
            let z = crate::resample::pixel_point(x as f64 + 0.5, y as f64 + 0.5, w, height);
            let r = if a.contains(z) {
                MaskRegion::DiskLowerA
            } else if b.is_some_and(|b| b.contains(z)) {
                MaskRegion::DiskLowerB
            } else {
                continue;
            };
            let px = out.color_from_rgb8(r.color());
            out.put_pixel(x, y, &px);
        }
    }
    Ok(out)
}

/// The hyperbolic map `z ↦ c₂ − r₁r₂/(z − c₁)`, which carries the outside of
/// the circle `|z − c₁| = r₁` onto the inside of `|z − c₂| = r₂`.
pub fn circle_pairing(c1: crate::C64, r1: f64, c2: crate::C64, r2: f64) -> Result<MobiusTransform> {
    MobiusTransform::new(c2, -(r1 * r2) - c2 * c1, crate::C64::new(1.0, 0.0), -c1)
}
