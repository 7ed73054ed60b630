//! Spatial fusion: composite an animated object over the inpainted background
//! and stitch the crop back into the full image with a soft seam.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localization::LocalizedObject;
use crate::raster::{self, distance_transform, lerp, resample, resample_mask, AlphaMask, Kernel, PixelRect, RasterImage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionParams {
    /// Width of the alpha ramp inside the object boundary.
    pub feather_radius: f64,
    /// Width of the blend ramp along the crop rectangle border.
    pub seam_width: f64,
}

impl Default for FusionParams {
    fn default() -> Self {
        FusionParams {
            feather_radius: 6.0,
            seam_width: 8.0,
        }
    }
}

impl FusionParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("feather_radius", self.feather_radius), ("seam_width", self.seam_width)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::params(format!("fusion.{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Soft alpha rising from 0 at the boundary to 1 at `radius` pixels inside the
/// foreground (`mask >= 0.5`).
pub fn feather(mask: &AlphaMask, radius: f64) -> Result<AlphaMask> {
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(Error::params(format!("feather radius must be >= 0, got {radius}")));
    }
    let bin = mask.binarize(0.5);
    if radius == 0.0 {
        return Ok(bin);
    }
    let dist = distance_transform(&bin)?;
    let data = dist.data().iter().map(|&d| (d / radius).min(1.0) as f32).collect();
    AlphaMask::from_vec(bin.width(), bin.height(), data)
}

fn same_size(expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
    if expected != actual {
        return Err(Error::SizeMismatch { expected, actual });
    }
    Ok(())
}

/// `alpha * fg + (1 - alpha) * bg` on RGB; output alpha is 1.
pub fn composite(fg: &RasterImage, alpha: &AlphaMask, bg: &RasterImage) -> Result<RasterImage> {
    same_size(fg.dims(), alpha.dims())?;
    same_size(fg.dims(), bg.dims())?;
    let mut data = Vec::with_capacity(fg.data().len());
    for ((f, b), &a) in fg.data().chunks_exact(4).zip(bg.data().chunks_exact(4)).zip(alpha.data()) {
        data.extend([lerp(b[0], f[0], a), lerp(b[1], f[1], a), lerp(b[2], f[2], a), 1.0]);
    }
    Ok(RasterImage::from_raw_unchecked(fg.width(), fg.height(), data))
}

/// Seam weight of pixel `(i, j)` in a `w x h` rectangle: 1 deep inside,
/// ramping down toward the border. Edge pixels sit at distance 1.
pub fn seam_weight(i: usize, j: usize, w: usize, h: usize, seam_width: f64) -> f32 {
    if seam_width <= 0.0 {
        return 1.0;
    }
    let d = (i + 1).min(j + 1).min(w - i).min(h - j);
    (d as f64 / seam_width).min(1.0) as f32
}

/// Blend `patch` into `full` over `rect`; pixels outside `rect` are untouched.
pub fn stitch_back(full: &RasterImage, rect: PixelRect, patch: &RasterImage, seam_width: f64) -> Result<RasterImage> {
    same_size((rect.w, rect.h), patch.dims())?;
    if !rect.fits(full.width(), full.height()) {
        return Err(Error::RectOutOfBounds {
            rect,
            width: full.width(),
            height: full.height(),
        });
    }
    let mut out = full.clone();
    for j in 0..rect.h {
        for i in 0..rect.w {
            let beta = seam_weight(i, j, rect.w, rect.h, seam_width);
            let f = full.pixel(rect.x + i, rect.y + j);
            let p = patch.pixel(i, j);
            out.set_pixel(
                rect.x + i,
                rect.y + j,
                [lerp(f[0], p[0], beta), lerp(f[1], p[1], beta), lerp(f[2], p[2], beta), lerp(f[3], p[3], beta)],
            );
        }
    }
    Ok(out)
}

/// Fit one animated frame back into the raw image.
pub fn fuse_frame(
    raw: &RasterImage,
    loc: &LocalizedObject,
    background: &RasterImage,
    frame: &RasterImage,
    frame_alpha: &AlphaMask,
    p: &FusionParams,
) -> Result<RasterImage> {
    p.validate()?;
    same_size(raw.dims(), background.dims())?;
    same_size(frame.dims(), frame_alpha.dims())?;
    let rect = loc.source_rect;
    let fg = resample(frame, rect.w, rect.h, Kernel::Bilinear)?;
    let alpha = feather(&resample_mask(frame_alpha, rect.w, rect.h, Kernel::Bilinear)?, p.feather_radius)?;
    let bg = raster::crop(background, rect)?;
    let patch = composite(&fg, &alpha, &bg)?;
    stitch_back(raw, rect, &patch, p.seam_width)
}
