//! Image primitives shared by every stage.
//!
//! Pixels are stored as `f32` in `[0, 1]`, row-major with the origin at the
//! top-left corner. Values are clamped whenever they are written, so every
//! stored sample is always inside the unit interval. No gamma handling is
//! performed anywhere: the numbers are treated as-is.

mod distance;
mod io;
mod resample;

pub use distance::{distance_transform, DistanceField};
pub use io::{
    decode_mask_png, decode_png, encode_mask_png, encode_png, read_mask_png, read_png, write_mask_png, write_png,
};
pub use resample::{resample, resample_mask, Kernel};
pub(crate) use resample::{resample_planar, resample_planar_signed};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An RGB triple in `[0, 1]`.
pub type Rgb = [f32; 3];
/// An RGBA quadruple in `[0, 1]`.
pub type Rgba = [f32; 4];

#[inline]
pub(crate) fn clamp_unit(v: f32) -> f32 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

/// Map a unit value to an 8-bit sample, `round(255 v)`.
#[inline]
pub fn to_u8(v: f32) -> u8 {
    (clamp_unit(v) * 255.0).round() as u8
}

#[inline]
pub fn from_u8(v: u8) -> f32 {
    v as f32 / 255.0
}

/// Linear interpolation that returns the endpoints exactly at `t = 0` and `t = 1`
/// and returns `a` exactly whenever `a == b`.
#[inline]
pub(crate) fn lerp(a: f32, b: f32, t: f32) -> f32 {
    if t >= 1.0 {
        b
    } else if t <= 0.0 {
        a
    } else {
        a + t * (b - a)
    }
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PixelRect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl PixelRect {
    pub const fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        PixelRect { x, y, w, h }
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.w >= 1
            && self.h >= 1
            && self.x.checked_add(self.w).is_some_and(|r| r <= width)
            && self.y.checked_add(self.h).is_some_and(|b| b <= height)
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }

    fn check(&self, width: usize, height: usize) -> Result<()> {
        if self.fits(width, height) {
            Ok(())
        } else {
            Err(Error::RectOutOfBounds {
                rect: *self,
                width,
                height,
            })
        }
    }
}

impl fmt::Display for PixelRect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}x{})", self.x, self.y, self.w, self.h)
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::params(format!(
            "image dimensions must be at least 1x1, got {width}x{height}"
        )));
    }
    Ok(())
}

/// An RGBA raster with unit-range samples.
#[derive(Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl fmt::Debug for RasterImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RasterImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl RasterImage {
    pub fn filled(width: usize, height: usize, color: Rgba) -> Result<Self> {
        check_dims(width, height)?;
        let px = color.map(clamp_unit);
        let mut data = Vec::with_capacity(width * height * 4);
        for _ in 0..width * height {
            data.extend_from_slice(&px);
        }
        Ok(RasterImage {
            width,
            height,
            data,
        })
    }

    /// Build from interleaved RGBA samples; values are clamped into `[0, 1]`.
    pub fn from_rgba(width: usize, height: usize, mut data: Vec<f32>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height * 4 {
            return Err(Error::params(format!(
                "expected {} samples for a {width}x{height} RGBA image, got {}",
                width * height * 4,
                data.len()
            )));
        }
        data.iter_mut().for_each(|v| *v = clamp_unit(*v));
        Ok(RasterImage {
            width,
            height,
            data,
        })
    }

    pub fn from_rgba8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        Self::from_rgba(width, height, bytes.iter().map(|&b| from_u8(b)).collect())
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Rgba) -> Result<Self> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width * height * 4);
        for y in 0..height {
            for x in 0..width {
                data.extend(f(x, y).map(clamp_unit));
            }
        }
        Ok(RasterImage {
            width,
            height,
            data,
        })
    }

    pub fn to_rgba8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| to_u8(v)).collect()
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> Rgba {
        let i = (y * self.width + x) * 4;
        [self.data[i], self.data[i + 1], self.data[i + 2], self.data[i + 3]]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, px: Rgba) {
        let i = (y * self.width + x) * 4;
        for (c, v) in px.into_iter().enumerate() {
            self.data[i + c] = clamp_unit(v);
        }
    }

    /// Extract one channel as a mask.
    pub fn channel(&self, c: usize) -> AlphaMask {
        AlphaMask {
            width: self.width,
            height: self.height,
            data: self.data.chunks_exact(4).map(|p| p[c]).collect(),
        }
    }

    /// Replace one channel with the contents of `mask`.
    pub fn with_channel(mut self, c: usize, mask: &AlphaMask) -> Result<Self> {
        if mask.dims() != self.dims() {
            return Err(Error::SizeMismatch {
                expected: self.dims(),
                actual: mask.dims(),
            });
        }
        for (p, &m) in self.data.chunks_exact_mut(4).zip(mask.data()) {
            p[c] = m;
        }
        Ok(self)
    }

    /// Snap every sample to the nearest 8-bit level, as a PNG round trip would.
    pub fn quantized_8bit(&self) -> Self {
        RasterImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| from_u8(to_u8(v))).collect(),
        }
    }

    pub(crate) fn from_raw_unchecked(width: usize, height: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), width * height * 4);
        RasterImage {
            width,
            height,
            data,
        }
    }
}

/// Single-channel coverage map in `[0, 1]`.
#[derive(Clone, PartialEq)]
pub struct AlphaMask {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl fmt::Debug for AlphaMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlphaMask")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl AlphaMask {
    pub fn filled(width: usize, height: usize, value: f32) -> Result<Self> {
        check_dims(width, height)?;
        Ok(AlphaMask {
            width,
            height,
            data: vec![clamp_unit(value); width * height],
        })
    }

    pub fn from_vec(width: usize, height: usize, mut data: Vec<f32>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(Error::params(format!(
                "expected {} samples for a {width}x{height} mask, got {}",
                width * height,
                data.len()
            )));
        }
        data.iter_mut().for_each(|v| *v = clamp_unit(*v));
        Ok(AlphaMask {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Result<Self> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(clamp_unit(f(x, y)));
            }
        }
        Ok(AlphaMask {
            width,
            height,
            data,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = clamp_unit(v);
    }

    pub fn is_binary(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub(crate) fn require_binary(&self) -> Result<()> {
        match self.data.iter().find(|&&v| v != 0.0 && v != 1.0) {
            Some(&v) => Err(Error::NonBinaryMask(v)),
            None => Ok(()),
        }
    }

    /// `1` where the value is at least `threshold`, `0` elsewhere.
    pub fn binarize(&self, threshold: f32) -> AlphaMask {
        AlphaMask {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|&v| if v >= threshold { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|&&v| v > 0.0).count()
    }

    pub fn crop(&self, rect: PixelRect) -> Result<AlphaMask> {
        rect.check(self.width, self.height)?;
        let mut data = Vec::with_capacity(rect.w * rect.h);
        for y in rect.y..rect.y + rect.h {
            let row = y * self.width;
            data.extend_from_slice(&self.data[row + rect.x..row + rect.x + rect.w]);
        }
        Ok(AlphaMask {
            width: rect.w,
            height: rect.h,
            data,
        })
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| to_u8(v)).collect()
    }

    pub fn quantized_8bit(&self) -> Self {
        AlphaMask {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| from_u8(to_u8(v))).collect(),
        }
    }

    pub(crate) fn from_raw_unchecked(width: usize, height: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        AlphaMask {
            width,
            height,
            data,
        }
    }
}

/// Copy the pixels of `img` inside `rect`.
pub fn crop(img: &RasterImage, rect: PixelRect) -> Result<RasterImage> {
    rect.check(img.width, img.height)?;
    let mut data = Vec::with_capacity(rect.w * rect.h * 4);
    for y in rect.y..rect.y + rect.h {
        let row = (y * img.width + rect.x) * 4;
        data.extend_from_slice(&img.data[row..row + rect.w * 4]);
    }
    Ok(RasterImage::from_raw_unchecked(rect.w, rect.h, data))
}

/// Return a copy of `dst` with the region `at` overwritten by `src`.
pub fn paste(dst: &RasterImage, src: &RasterImage, at: PixelRect) -> Result<RasterImage> {
    if (at.w, at.h) != src.dims() {
        return Err(Error::SizeMismatch {
            expected: (at.w, at.h),
            actual: src.dims(),
        });
    }
    at.check(dst.width, dst.height)?;
    let mut out = dst.clone();
    for j in 0..at.h {
        let d = ((at.y + j) * dst.width + at.x) * 4;
        let s = j * src.width * 4;
        out.data[d..d + at.w * 4].copy_from_slice(&src.data[s..s + at.w * 4]);
    }
    Ok(out)
}
