//! Integer-factor upscaling: Lanczos-3 initialization refined by iterative
//! back-projection, so that shrinking the result approximately recovers the input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{clamp_unit, resample_planar, resample_planar_signed, Kernel, RasterImage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnhanceParams {
    pub factor: usize,
    pub bp_iterations: usize,
    pub bp_step: f32,
    /// Unsharp-mask amount applied after back-projection; 0 disables it.
    pub sharpen_amount: f32,
}

impl Default for EnhanceParams {
    fn default() -> Self {
        EnhanceParams {
            factor: 2,
            bp_iterations: 8,
            bp_step: 1.0,
            sharpen_amount: 0.0,
        }
    }
}

/// Largest accepted output side.
pub const MAX_SIDE: usize = 1 << 14;

impl EnhanceParams {
    pub fn validate(&self) -> Result<()> {
        if self.factor < 1 {
            return Err(Error::params("enhance.factor must be >= 1"));
        }
        if !(self.bp_step.is_finite() && self.bp_step >= 0.0) {
            return Err(Error::params(format!("enhance.bp_step must be >= 0, got {}", self.bp_step)));
        }
        if !(self.sharpen_amount.is_finite() && self.sharpen_amount >= 0.0) {
            return Err(Error::params(format!(
                "enhance.sharpen_amount must be >= 0, got {}",
                self.sharpen_amount
            )));
        }
        Ok(())
    }
}

/// Root-sum-square over RGB of `img - shrink(h)`.
pub fn consistency_residual(img: &RasterImage, h: &RasterImage) -> f64 {
    let down = resample_planar(h.data(), h.width(), h.height(), 4, img.width(), img.height(), Kernel::Bilinear);
    let diff: Vec<f32> = img.data().iter().zip(&down).map(|(a, b)| a - b).collect();
    rgb_norm(&diff)
}

fn rgb_norm(rgba: &[f32]) -> f64 {
    rgba.chunks_exact(4)
        .flat_map(|px| px[..3].iter().map(|&v| v as f64 * v as f64))
        .sum::<f64>()
        .sqrt()
}

/// Upscale by `p.factor`. Returns the image and the consistency residual
/// after initialization and after each back-projection round.
pub fn upscale_traced(img: &RasterImage, p: &EnhanceParams) -> Result<(RasterImage, Vec<f64>)> {
    p.validate()?;
    let (w, h) = img.dims();
    let f = p.factor;
    let (uw, uh) = (w * f, h * f);
    if uw > MAX_SIDE || uh > MAX_SIDE {
        return Err(Error::params(format!("upscaled size {uw}x{uh} exceeds {MAX_SIDE}")));
    }
    let mut hi = resample_planar(img.data(), w, h, 4, uw, uh, Kernel::Lanczos3);
    let alpha: Vec<f32> = hi.chunks_exact(4).map(|px| px[3]).collect();
    let mut trace = Vec::with_capacity(p.bp_iterations + 1);
    if f == 1 {
        // shrink(h) == h, so the residual is already zero
        trace.resize(p.bp_iterations + 1, 0.0);
    } else {
        for _ in 0..p.bp_iterations {
            let down = resample_planar(&hi, uw, uh, 4, w, h, Kernel::Bilinear);
            let residual: Vec<f32> = img.data().iter().zip(&down).map(|(a, b)| a - b).collect();
            trace.push(rgb_norm(&residual));
            let up = resample_planar_signed(&residual, w, h, 4, uw, uh, Kernel::Bilinear);
            for (i, (v, r)) in hi.iter_mut().zip(&up).enumerate() {
                if i % 4 != 3 {
                    *v = clamp_unit(*v + p.bp_step * r);
                }
            }
        }
        trace.push(consistency_residual(img, &RasterImage::from_raw_unchecked(uw, uh, hi.clone())));
    }
    if p.sharpen_amount > 0.0 {
        hi = unsharp(&hi, uw, uh, p.sharpen_amount);
    }
    for (px, a) in hi.chunks_exact_mut(4).zip(alpha) {
        px[3] = a;
    }
    Ok((RasterImage::from_raw_unchecked(uw, uh, hi), trace))
}

pub fn upscale(img: &RasterImage, p: &EnhanceParams) -> Result<RasterImage> {
    upscale_traced(img, p).map(|(out, _)| out)
}

/// `v + amount * (v - blur(v))` on RGB with a separable [1 2 1]/4 blur.
fn unsharp(data: &[f32], w: usize, h: usize, amount: f32) -> Vec<f32> {
    let at = |x: isize, y: isize, c: usize| {
        let x = x.clamp(0, w as isize - 1) as usize;
        let y = y.clamp(0, h as isize - 1) as usize;
        data[(y * w + x) * 4 + c]
    };
    let mut out = data.to_vec();
    for y in 0..h as isize {
        for x in 0..w as isize {
            for c in 0..3 {
                let mut blur = 0.0;
                for (dy, wy) in [(-1, 0.25), (0, 0.5), (1, 0.25)] {
                    for (dx, wx) in [(-1, 0.25), (0, 0.5), (1, 0.25)] {
                        blur += wy * wx * at(x + dx, y + dy, c);
                    }
                }
                let v = at(x, y, c);
                out[(y as usize * w + x as usize) * 4 + c] = clamp_unit(v + amount * (v - blur));
            }
        }
    }
    out
}
