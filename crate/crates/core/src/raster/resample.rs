use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{clamp_unit, AlphaMask, RasterImage};

/// Reconstruction filter used by [`resample`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Nearest,
    Bilinear,
    Bicubic,
    Lanczos3,
}

impl Kernel {
    fn support(self) -> f64 {
        match self {
            Kernel::Nearest => 0.5,
            Kernel::Bilinear => 1.0,
            Kernel::Bicubic => 2.0,
            Kernel::Lanczos3 => 3.0,
        }
    }

    fn eval(self, x: f64) -> f64 {
        let ax = x.abs();
        match self {
            Kernel::Nearest => {
                if ax < 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            Kernel::Bilinear => (1.0 - ax).max(0.0),
            Kernel::Bicubic => {
                // Keys cubic, a = -0.5
                const A: f64 = -0.5;
                if ax < 1.0 {
                    ((A + 2.0) * ax - (A + 3.0)) * ax * ax + 1.0
                } else if ax < 2.0 {
                    (((ax - 5.0) * ax + 8.0) * ax - 4.0) * A
                } else {
                    0.0
                }
            }
            Kernel::Lanczos3 => {
                if ax < 1e-12 {
                    1.0
                } else if ax < 3.0 {
                    let px = std::f64::consts::PI * ax;
                    3.0 * px.sin() * (px / 3.0).sin() / (px * px)
                } else {
                    0.0
                }
            }
        }
    }
}

/// Taps for one output coordinate: clamped source indices and normalized weights.
/// `reference` indexes the heaviest tap.
struct Taps {
    index: Vec<usize>,
    weight: Vec<f64>,
    reference: usize,
}

fn taps(kernel: Kernel, in_len: usize, out_len: usize) -> Vec<Taps> {
    let scale = in_len as f64 / out_len as f64;
    let stretch = scale.max(1.0);
    let support = kernel.support() * stretch;
    (0..out_len)
        .map(|o| {
            let center = (o as f64 + 0.5) * scale;
            if kernel == Kernel::Nearest {
                let i = (center.floor() as usize).min(in_len - 1);
                return Taps {
                    index: vec![i],
                    weight: vec![1.0],
                    reference: 0,
                };
            }
            let lo = (center - support).floor() as i64;
            let hi = (center + support).ceil() as i64;
            let mut index = Vec::new();
            let mut weight = Vec::new();
            for j in lo..=hi {
                let wgt = kernel.eval((j as f64 + 0.5 - center) / stretch);
                if wgt != 0.0 {
                    index.push(j.clamp(0, in_len as i64 - 1) as usize);
                    weight.push(wgt);
                }
            }
            let sum: f64 = weight.iter().sum();
            weight.iter_mut().for_each(|w| *w /= sum);
            let reference = weight
                .iter()
                .enumerate()
                .fold(0, |best, (i, &w)| if w > weight[best] { i } else { best });
            Taps {
                index,
                weight,
                reference,
            }
        })
        .collect()
}

pub(crate) fn resample_planar(
    data: &[f32],
    w: usize,
    h: usize,
    ch: usize,
    out_w: usize,
    out_h: usize,
    kernel: Kernel,
) -> Vec<f32> {
    resample_planar_with(data, w, h, ch, out_w, out_h, kernel, clamp_unit)
}

/// Like `resample_planar` but without clamping, for signed data such as residuals.
pub(crate) fn resample_planar_signed(
    data: &[f32],
    w: usize,
    h: usize,
    ch: usize,
    out_w: usize,
    out_h: usize,
    kernel: Kernel,
) -> Vec<f32> {
    resample_planar_with(data, w, h, ch, out_w, out_h, kernel, |v| v)
}

/// Separable pass pair. Every weighted sum is written as `ref + Σ w (v - ref)`
/// around the heaviest tap, so constant inputs come back unchanged bit for bit.
#[allow(clippy::too_many_arguments)]
fn resample_planar_with(
    data: &[f32],
    w: usize,
    h: usize,
    ch: usize,
    out_w: usize,
    out_h: usize,
    kernel: Kernel,
    finish: impl Fn(f32) -> f32 + Sync,
) -> Vec<f32> {
    debug_assert!((1..=4).contains(&ch));
    if (w, h) == (out_w, out_h) {
        return data.to_vec();
    }
    let xt = taps(kernel, w, out_w);
    let mut horiz = vec![0.0f32; out_w * h * ch];
    horiz.par_chunks_mut(out_w * ch).enumerate().for_each(|(y, out_row)| {
        let row = &data[y * w * ch..(y + 1) * w * ch];
        for (ox, t) in xt.iter().enumerate() {
            let reference = &row[t.index[t.reference] * ch..][..ch];
            let mut acc = [0.0f64; 4];
            for (&i, &wgt) in t.index.iter().zip(&t.weight) {
                for ((a, &v), &r) in acc.iter_mut().zip(&row[i * ch..][..ch]).zip(reference) {
                    *a += wgt * (v as f64 - r as f64);
                }
            }
            for ((o, a), &r) in out_row[ox * ch..][..ch].iter_mut().zip(acc).zip(reference) {
                *o = (r as f64 + a) as f32;
            }
        }
    });
    // vertical pass a whole row at a time; same per-element arithmetic as `apply`
    let yt = taps(kernel, h, out_h);
    let row_len = out_w * ch;
    let mut out = vec![0.0f32; out_w * out_h * ch];
    out.par_chunks_mut(row_len).zip(yt.par_iter()).for_each(|(out_row, t)| {
        let reference = &horiz[t.index[t.reference] * row_len..][..row_len];
        let mut acc = vec![0.0f64; row_len];
        for (&i, &wgt) in t.index.iter().zip(&t.weight) {
            let src = &horiz[i * row_len..][..row_len];
            for ((a, &v), &r) in acc.iter_mut().zip(src).zip(reference) {
                *a += wgt * (v as f64 - r as f64);
            }
        }
        for ((o, a), &r) in out_row.iter_mut().zip(acc).zip(reference) {
            *o = finish((r as f64 + a) as f32);
        }
    });
    out
}

fn check_size(out_w: usize, out_h: usize) -> Result<()> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::params(format!(
            "resample target must be at least 1x1, got {out_w}x{out_h}"
        )));
    }
    Ok(())
}

/// Separable resampling with clamp-to-edge borders. When shrinking, the kernel
/// is stretched by the scale factor so every input pixel contributes.
pub fn resample(img: &RasterImage, out_w: usize, out_h: usize, kernel: Kernel) -> Result<RasterImage> {
    check_size(out_w, out_h)?;
    let data = resample_planar(img.data(), img.width(), img.height(), 4, out_w, out_h, kernel);
    Ok(RasterImage::from_raw_unchecked(out_w, out_h, data))
}

pub fn resample_mask(mask: &AlphaMask, out_w: usize, out_h: usize, kernel: Kernel) -> Result<AlphaMask> {
    check_size(out_w, out_h)?;
    let data = resample_planar(mask.data(), mask.width(), mask.height(), 1, out_w, out_h, kernel);
    Ok(AlphaMask::from_raw_unchecked(out_w, out_h, data))
}
