//! Object localization: backdrop estimation, colour-distance matting, and the
//! square on-white crop handed to the motion stage.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{self, distance_transform, lerp, AlphaMask, PixelRect, RasterImage, Rgb};

/// Colour-distance matting parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MattingParams {
    /// Width of the frame of pixels used to estimate the backdrop colour.
    pub border_width: usize,
    /// Colour distance at or below which a pixel is pure background.
    pub t_lo: f32,
    /// Colour distance at or above which a pixel is pure foreground.
    pub t_hi: f32,
    pub close_radius: usize,
    /// Extra context around the object's bounding box, as a fraction of its longer side.
    pub margin_frac: f32,
}

impl Default for MattingParams {
    fn default() -> Self {
        MattingParams {
            border_width: 4,
            t_lo: 0.06,
            t_hi: 0.14,
            close_radius: 2,
            margin_frac: 0.15,
        }
    }
}

impl MattingParams {
    pub fn validate(&self) -> Result<()> {
        if self.border_width < 1 {
            return Err(Error::params("matting.border_width must be >= 1"));
        }
        if !(self.t_lo >= 0.0 && self.t_lo < self.t_hi && self.t_hi <= 3f32.sqrt()) {
            return Err(Error::params(format!(
                "matting thresholds must satisfy 0 <= t_lo < t_hi <= sqrt(3), got t_lo = {}, t_hi = {}",
                self.t_lo, self.t_hi
            )));
        }
        if !self.margin_frac.is_finite() || self.margin_frac < 0.0 {
            return Err(Error::params("matting.margin_frac must be a finite value >= 0"));
        }
        Ok(())
    }
}

/// The isolated object, ready for animation.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizedObject {
    /// Square crop with the object composited onto white.
    pub crop: RasterImage,
    /// Soft coverage of the object inside the crop.
    pub crop_mask: AlphaMask,
    pub source_rect: PixelRect,
    /// Full-size binary mask of the pixels to inpaint.
    pub hole_mask: AlphaMask,
    pub background: Rgb,
}

/// Channel-wise median of every pixel within `border_width` of an image edge.
pub fn estimate_background_color(img: &RasterImage, border_width: usize) -> Result<Rgb> {
    let (w, h) = img.dims();
    if border_width < 1 || 2 * border_width >= w.min(h) {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            border: border_width,
        });
    }
    let mut channels: [Vec<f32>; 3] = Default::default();
    for y in 0..h {
        for x in 0..w {
            let on_border =
                x < border_width || y < border_width || x >= w - border_width || y >= h - border_width;
            if on_border {
                let p = img.pixel(x, y);
                for c in 0..3 {
                    channels[c].push(p[c]);
                }
            }
        }
    }
    Ok(channels.map(|mut v| median(&mut v)))
}

fn median(v: &mut [f32]) -> f32 {
    v.sort_by(f32::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Soft alpha from colour distance to the backdrop, ramping from `t_lo` to `t_hi`.
pub fn soft_alpha(img: &RasterImage, bg: Rgb, p: &MattingParams) -> AlphaMask {
    let span = p.t_hi - p.t_lo;
    let data = img
        .data()
        .chunks_exact(4)
        .map(|px| {
            let d = ((px[0] - bg[0]).powi(2) + (px[1] - bg[1]).powi(2) + (px[2] - bg[2]).powi(2)).sqrt();
            ((d - p.t_lo) / span).clamp(0.0, 1.0)
        })
        .collect();
    AlphaMask::from_raw_unchecked(img.width(), img.height(), data)
}

/// Binary dilation by a disk of `radius` pixels.
pub(crate) fn dilate(mask: &AlphaMask, radius: usize) -> AlphaMask {
    if radius == 0 {
        return mask.clone();
    }
    let inverse = AlphaMask::from_raw_unchecked(
        mask.width(),
        mask.height(),
        mask.data().iter().map(|&v| 1.0 - v).collect(),
    );
    let d = distance_transform(&inverse).expect("binary input");
    let r = radius as f64;
    AlphaMask::from_raw_unchecked(
        mask.width(),
        mask.height(),
        d.data().iter().map(|&v| if v <= r { 1.0 } else { 0.0 }).collect(),
    )
}

/// Binary erosion by a disk; pixels outside the image do not constrain it.
pub(crate) fn erode(mask: &AlphaMask, radius: usize) -> AlphaMask {
    if radius == 0 {
        return mask.clone();
    }
    let d = distance_transform(mask).expect("binary input");
    let r = radius as f64;
    AlphaMask::from_raw_unchecked(
        mask.width(),
        mask.height(),
        d.data().iter().map(|&v| if v > r { 1.0 } else { 0.0 }).collect(),
    )
}

/// Keep the largest 4-connected component. Ties go to the component whose
/// first pixel comes first in row-major order.
pub(crate) fn largest_component(mask: &AlphaMask) -> AlphaMask {
    let (w, h) = mask.dims();
    let mut label = vec![0u32; w * h];
    let mut best: Option<(u32, usize)> = None;
    let mut next = 1u32;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if mask.data()[start] == 0.0 || label[start] != 0 {
            continue;
        }
        let id = next;
        next += 1;
        label[start] = id;
        queue.push_back(start);
        let mut size = 0;
        while let Some(i) = queue.pop_front() {
            size += 1;
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if mask.data()[j] != 0.0 && label[j] == 0 {
                    label[j] = id;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        if best.is_none_or(|(_, s)| size > s) {
            best = Some((id, size));
        }
    }
    let keep = best.map_or(0, |(id, _)| id);
    AlphaMask::from_raw_unchecked(
        w,
        h,
        label.iter().map(|&l| if l != 0 && l == keep { 1.0 } else { 0.0 }).collect(),
    )
}

/// Binary foreground mask: thresholded soft alpha, closed, dominant component only.
pub fn compute_foreground_mask(img: &RasterImage, bg: Rgb, p: &MattingParams) -> Result<AlphaMask> {
    p.validate()?;
    let hard = soft_alpha(img, bg, p).binarize(0.5);
    let closed = erode(&dilate(&hard, p.close_radius), p.close_radius);
    let mask = largest_component(&closed);
    if mask.count_nonzero() == 0 {
        return Err(Error::ObjectNotFound);
    }
    Ok(mask)
}

fn bounding_box(mask: &AlphaMask) -> Option<(usize, usize, usize, usize)> {
    let (w, h) = mask.dims();
    let mut bb: Option<(usize, usize, usize, usize)> = None;
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) > 0.0 {
                bb = Some(match bb {
                    None => (x, y, x, y),
                    Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
                });
            }
        }
    }
    bb
}

/// Square crop rectangle around the inclusive box `(x0, y0, x1, y1)`.
pub(crate) fn square_rect(
    bbox: (usize, usize, usize, usize),
    margin_frac: f32,
    width: usize,
    height: usize,
) -> PixelRect {
    let (x0, y0, x1, y1) = bbox;
    let (bw, bh) = (x1 - x0 + 1, y1 - y0 + 1);
    let m = (margin_frac as f64 * bw.max(bh) as f64).round() as i64;
    let (mut left, mut top) = (x0 as i64 - m, y0 as i64 - m);
    let (rw, rh) = (bw as i64 + 2 * m, bh as i64 + 2 * m);
    let mut side = rw.max(rh);
    left -= (side - rw) / 2;
    top -= (side - rh) / 2;
    side = side.min(width as i64).min(height as i64);
    left = left.clamp(0, width as i64 - side);
    top = top.clamp(0, height as i64 - side);
    PixelRect::new(left as usize, top as usize, side as usize, side as usize)
}

/// Run matting and cut the square on-white crop plus the inpainting hole.
pub fn localize(img: &RasterImage, p: &MattingParams) -> Result<LocalizedObject> {
    p.validate()?;
    let background = estimate_background_color(img, p.border_width)?;
    let soft = soft_alpha(img, background, p);
    let mask = compute_foreground_mask(img, background, p)?;
    let bbox = bounding_box(&mask).ok_or(Error::ObjectNotFound)?;
    let rect = square_rect(bbox, p.margin_frac, img.width(), img.height());

    let dilated = dilate(&mask, p.close_radius);
    let hole_mask = AlphaMask::from_fn(img.width(), img.height(), |x, y| {
        if rect.contains(x, y) {
            dilated.get(x, y)
        } else {
            0.0
        }
    })?;

    // alpha outside the dilated object is dropped so stray specks stay in the background
    let crop_mask = AlphaMask::from_fn(rect.w, rect.h, |i, j| {
        let (x, y) = (rect.x + i, rect.y + j);
        if hole_mask.get(x, y) > 0.0 {
            soft.get(x, y)
        } else {
            0.0
        }
    })?;
    let raw = raster::crop(img, rect)?;
    let crop = RasterImage::from_fn(rect.w, rect.h, |i, j| {
        let a = crop_mask.get(i, j);
        let px = raw.pixel(i, j);
        [lerp(1.0, px[0], a), lerp(1.0, px[1], a), lerp(1.0, px[2], a), 1.0]
    })?;

    Ok(LocalizedObject {
        crop,
        crop_mask,
        source_rect: rect,
        hole_mask,
        background,
    })
}
