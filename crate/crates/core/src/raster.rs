//! Pixel buffers: a general rectangular [`Raster`] and the 2:1
//! equirectangular [`SphericalImage`] built on it.
//!
//! Samples are stored as `u16` at the file's native depth (8 or 16 bit), so
//! a nearest-neighbour copy never changes a value. Averaging happens in
//! linear light through [`to_linear`] and [`from_linear`].

use std::ops::{Deref, DerefMut};
use std::path::Path;
use std::sync::OnceLock;

use image::{DynamicImage, ImageBuffer, Rgb, Rgba};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bits per channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn max_value(self) -> u16 {
        match self {
            BitDepth::Eight => 255,
            BitDepth::Sixteen => 65535,
        }
    }
}

/// An 8-bit RGB triple, the unit used for configured colors.
pub type Rgb8 = [u8; 3];

/// A rectangular image with 3 or 4 channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    channels: usize,
    depth: BitDepth,
    data: Vec<u16>,
}

impl Raster {
    pub fn new(width: usize, height: usize, channels: usize, depth: BitDepth) -> Result<Self> {
        if !(channels == 3 || channels == 4) {
            return Err(Error::InvalidParameter(format!("{channels} channels; expected 3 or 4")));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter("empty image".into()));
        }
        Ok(Self { width, height, channels, depth, data: vec![0; width * height * channels] })
    }

    /// An RGB image filled with one 8-bit color, stored at `depth`.
    pub fn filled(width: usize, height: usize, depth: BitDepth, color: Rgb8) -> Result<Self> {
        let mut r = Self::new(width, height, 3, depth)?;
        let px = r.color_from_rgb8(color);
        for chunk in r.data.chunks_exact_mut(3) {
            chunk.copy_from_slice(&px[..3]);
        }
        Ok(r)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn depth(&self) -> BitDepth {
        self.depth
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u16] {
        &mut self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[u16] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    pub fn put_pixel(&mut self, x: usize, y: usize, px: &[u16]) {
        let i = (y * self.width + x) * self.channels;
        self.data[i..i + self.channels].copy_from_slice(&px[..self.channels]);
    }

    /// Pixel as 8-bit RGB, for inspection and mask classification.
    pub fn rgb8(&self, x: usize, y: usize) -> Rgb8 {
        let p = self.pixel(x, y);
        let f = |v: u16| match self.depth {
            BitDepth::Eight => v as u8,
            BitDepth::Sixteen => ((v as u32 + 128) / 257) as u8,
        };
        [f(p[0]), f(p[1]), f(p[2])]
    }

    /// An 8-bit color converted to this raster's depth, opaque alpha.
    pub fn color_from_rgb8(&self, c: Rgb8) -> [u16; 4] {
        let s = match self.depth {
            BitDepth::Eight => 1,
            BitDepth::Sixteen => 257,
        };
        [c[0] as u16 * s, c[1] as u16 * s, c[2] as u16 * s, self.depth.max_value()]
    }

    /// Rescales every sample to another depth.
    pub fn to_depth(&self, depth: BitDepth) -> Raster {
        let data = match (self.depth, depth) {
            (a, b) if a == b => self.data.clone(),
            (BitDepth::Eight, BitDepth::Sixteen) => self.data.iter().map(|&v| v * 257).collect(),
            _ => self.data.iter().map(|&v| ((v as u32 + 128) / 257) as u16).collect(),
        };
        Raster { depth, data, ..*self }
    }

    pub fn from_dynamic(img: DynamicImage) -> Result<Self> {
        use image::ColorType::*;
        let (w, h) = (img.width() as usize, img.height() as usize);
        let (depth, alpha) = match img.color() {
            L8 | Rgb8 => (BitDepth::Eight, false),
            La8 | Rgba8 => (BitDepth::Eight, true),
            L16 | Rgb16 | Rgb32F => (BitDepth::Sixteen, false),
            _ => (BitDepth::Sixteen, true),
        };
        let data: Vec<u16> = match (depth, alpha) {
            (BitDepth::Eight, false) => img.to_rgb8().into_raw().into_iter().map(u16::from).collect(),
            (BitDepth::Eight, true) => img.to_rgba8().into_raw().into_iter().map(u16::from).collect(),
            (BitDepth::Sixteen, false) => img.to_rgb16().into_raw(),
            (BitDepth::Sixteen, true) => img.to_rgba16().into_raw(),
        };
        Ok(Self { width: w, height: h, channels: if alpha { 4 } else { 3 }, depth, data })
    }

    pub fn to_dynamic(&self) -> DynamicImage {
        let (w, h) = (self.width as u32, self.height as u32);
        match (self.depth, self.channels) {
            (BitDepth::Eight, 3) => {
                let raw = self.data.iter().map(|&v| v as u8).collect();
                DynamicImage::ImageRgb8(ImageBuffer::<Rgb<u8>, _>::from_raw(w, h, raw).expect("size"))
            }
            (BitDepth::Eight, _) => {
                let raw = self.data.iter().map(|&v| v as u8).collect();
                DynamicImage::ImageRgba8(ImageBuffer::<Rgba<u8>, _>::from_raw(w, h, raw).expect("size"))
            }
            (BitDepth::Sixteen, 3) => DynamicImage::ImageRgb16(
                ImageBuffer::<Rgb<u16>, _>::from_raw(w, h, self.data.clone()).expect("size"),
            ),
            (BitDepth::Sixteen, _) => DynamicImage::ImageRgba16(
                ImageBuffer::<Rgba<u16>, _>::from_raw(w, h, self.data.clone()).expect("size"),
            ),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_dynamic(image::open(path)?)
    }

    /// Writes the image; the format follows the file extension.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_dynamic().save(path)?;
        Ok(())
    }
}

/// An equirectangular image: exactly twice as wide as it is tall, with
/// longitude wrapping at the left and right edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SphericalImage(Raster);

impl SphericalImage {
    pub fn new(height: usize, channels: usize, depth: BitDepth) -> Result<Self> {
        Self::try_from(Raster::new(2 * height, height, channels, depth)?)
    }

    pub fn filled(height: usize, depth: BitDepth, color: Rgb8) -> Result<Self> {
        Self::try_from(Raster::filled(2 * height, height, depth, color)?)
    }

    /// Centres a raster of any aspect on a black 2:1 canvas.
    pub fn padded(r: Raster) -> Self {
        let h = r.height.max(r.width.div_ceil(2));
        let mut canvas = Raster::new(2 * h, h, r.channels, r.depth).expect("valid size");
        let (ox, oy) = ((2 * h - r.width) / 2, (h - r.height) / 2);
        for y in 0..r.height {
            for x in 0..r.width {
                canvas.put_pixel(x + ox, y + oy, r.pixel(x, y));
            }
        }
        SphericalImage(canvas)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::try_from(Raster::load(path)?)
    }

    pub fn load_padded(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Self::padded(Raster::load(path)?))
    }

    pub fn raster(&self) -> &Raster {
        &self.0
    }

    pub fn into_raster(self) -> Raster {
        self.0
    }

    pub fn to_depth(&self, depth: BitDepth) -> Self {
        SphericalImage(self.0.to_depth(depth))
    }
}

impl TryFrom<Raster> for SphericalImage {
    type Error = Error;

    fn try_from(r: Raster) -> Result<Self> {
        if r.width != 2 * r.height {
            return Err(Error::Aspect { width: r.width as u32, height: r.height as u32 });
        }
        Ok(SphericalImage(r))
    }
}

impl Deref for SphericalImage {
    type Target = Raster;

    fn deref(&self) -> &Raster {
        &self.0
    }
}

impl DerefMut for SphericalImage {
    fn deref_mut(&mut self) -> &mut Raster {
        &mut self.0
    }
}

fn srgb_decode(s: f64) -> f64 {
    if s <= 0.04045 {
        s / 12.92
    } else {
        ((s + 0.055) / 1.055).powf(2.4)
    }
}

fn srgb_encode(l: f64) -> f64 {
    if l <= 0.0031308 {
        l * 12.92
    } else {
        1.055 * l.powf(1.0 / 2.4) - 0.055
    }
}

fn decode_table(depth: BitDepth) -> &'static [f64] {
    static EIGHT: OnceLock<Vec<f64>> = OnceLock::new();
    static SIXTEEN: OnceLock<Vec<f64>> = OnceLock::new();
    let build = |max: u16| (0..=max).map(|v| srgb_decode(v as f64 / max as f64)).collect();
    match depth {
        BitDepth::Eight => EIGHT.get_or_init(|| build(255)),
        BitDepth::Sixteen => SIXTEEN.get_or_init(|| build(65535)),
    }
}

/// Linear-light value of a color channel (alpha is passed through as a fraction).
pub fn to_linear(v: u16, depth: BitDepth, is_alpha: bool) -> f64 {
    if is_alpha {
        v as f64 / depth.max_value() as f64
    } else {
        decode_table(depth)[v as usize]
    }
}

/// Inverse of [`to_linear`], rounding to the nearest code.
pub fn from_linear(l: f64, depth: BitDepth, is_alpha: bool) -> u16 {
    let max = depth.max_value() as f64;
    let s = if is_alpha { l } else { srgb_encode(l.clamp(0.0, 1.0)) };
    (s.clamp(0.0, 1.0) * max).round() as u16
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transfer_round_trip_is_exact() {
        for depth in [BitDepth::Eight, BitDepth::Sixteen] {
            for v in 0..=depth.max_value() {
                assert_eq!(from_linear(to_linear(v, depth, false), depth, false), v);
                assert_eq!(from_linear(to_linear(v, depth, true), depth, true), v);
            }
        }
    }

    #[test]
    fn rejects_wrong_aspect() {
        let r = Raster::new(30, 20, 3, BitDepth::Eight).unwrap();
        assert!(matches!(SphericalImage::try_from(r.clone()), Err(Error::Aspect { .. })));
        let p = SphericalImage::padded(r);
        assert_eq!((p.width(), p.height()), (40, 20));
    }

    #[test]
    fn depth_conversion_round_trip() {
        let mut r = Raster::new(4, 2, 3, BitDepth::Eight).unwrap();
        for (i, v) in r.data_mut().iter_mut().enumerate() {
            *v = (i * 10) as u16;
        }
        assert_eq!(r.to_depth(BitDepth::Sixteen).to_depth(BitDepth::Eight), r);
    }

    #[test]
    fn png_round_trip() {
        let dir = std::env::temp_dir().join(format!("sphere-edit-raster-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        for depth in [BitDepth::Eight, BitDepth::Sixteen] {
            let mut img = SphericalImage::new(8, 4, depth).unwrap();
            for (i, v) in img.data_mut().iter_mut().enumerate() {
                *v = (i as u16 * 37) % depth.max_value();
            }
            let path = dir.join(format!("{depth:?}.png"));
            img.save(&path).unwrap();
            assert_eq!(SphericalImage::load(&path).unwrap(), img);
        }
        std::fs::remove_dir_all(dir).ok();
    }
}
