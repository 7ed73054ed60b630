//! Background inpainting with coarse-to-fine PatchMatch.
//!
//! The nearest-neighbour field maps every hole pixel to the centre of a source
//! patch outside the hole. Patch distance is a masked SSD: target pixels that
//! are themselves in the hole are skipped, and source pixels that fall in the
//! hole or off the image cost a fixed penalty. Hole colours are rebuilt by
//! weighted voting over all patches covering a pixel, so every output sample
//! is a convex combination of known input pixels.
//!
//! Randomness comes from counter-based streams keyed by
//! `(seed, level, iteration, pixel)`, so the per-pixel random search can run
//! on any number of threads without changing the result.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localization::LocalizedObject;
use crate::raster::{AlphaMask, RasterImage};
use crate::seed::stream_rng;

/// Cost of a known target pixel whose source counterpart is unusable.
const MISSING_SOURCE_PENALTY: f32 = 3.0;
/// Colour-space bandwidth of the voting weights.
const VOTE_SIGMA: f32 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InpaintParams {
    /// Odd patch side length.
    pub patch_size: usize,
    /// Propagation + random-search rounds per pyramid level.
    pub iterations: usize,
    /// Shrink factor of the random-search radius.
    pub search_decay: f32,
    /// `None` picks `ceil(log2(min_dim / 32))`, at least 1.
    pub pyramid_levels: Option<usize>,
    /// Set by the pipeline from the master seed.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for InpaintParams {
    fn default() -> Self {
        InpaintParams {
            patch_size: 7,
            iterations: 5,
            search_decay: 0.5,
            pyramid_levels: None,
            seed: 0,
        }
    }
}

impl InpaintParams {
    pub fn validate(&self) -> Result<()> {
        if self.patch_size < 3 || self.patch_size.is_multiple_of(2) {
            return Err(Error::params(format!(
                "inpaint.patch_size must be odd and >= 3, got {}",
                self.patch_size
            )));
        }
        if self.iterations < 1 {
            return Err(Error::params("inpaint.iterations must be >= 1"));
        }
        if !(self.search_decay > 0.0 && self.search_decay < 1.0) {
            return Err(Error::params(format!(
                "inpaint.search_decay must lie in (0, 1), got {}",
                self.search_decay
            )));
        }
        if self.pyramid_levels == Some(0) {
            return Err(Error::params("inpaint.pyramid_levels must be >= 1"));
        }
        Ok(())
    }

    fn levels_for(&self, w: usize, h: usize) -> usize {
        self.pyramid_levels.unwrap_or_else(|| {
            let ratio = w.min(h) as f64 / 32.0;
            (ratio.log2().ceil() as i64).max(1) as usize
        })
    }
}

/// Best-match entry for one hole pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NnfEntry {
    pub x: usize,
    pub y: usize,
    pub dx: i32,
    pub dy: i32,
    pub cost: f32,
}

/// Nearest-neighbour field over the hole pixels at full resolution, in row-major order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NearestNeighborField {
    pub entries: Vec<NnfEntry>,
}

impl NearestNeighborField {
    pub fn total_cost(&self) -> f64 {
        self.entries.iter().map(|e| e.cost as f64).sum()
    }
}

struct Level {
    w: usize,
    h: usize,
    rgb: Vec<[f32; 3]>,
    hole: Vec<bool>,
}

impl Level {
    fn from_image(img: &RasterImage, hole: &AlphaMask) -> Self {
        Level {
            w: img.width(),
            h: img.height(),
            rgb: img.data().chunks_exact(4).map(|p| [p[0], p[1], p[2]]).collect(),
            hole: hole.data().iter().map(|&v| v != 0.0).collect(),
        }
    }

    fn downsample(&self) -> Level {
        let (w, h) = (self.w.div_ceil(2), self.h.div_ceil(2));
        let mut rgb = Vec::with_capacity(w * h);
        let mut hole = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let mut sum = [0.0f32; 3];
                let mut n = 0.0;
                let mut any_hole = false;
                for sy in 2 * y..(2 * y + 2).min(self.h) {
                    for sx in 2 * x..(2 * x + 2).min(self.w) {
                        let i = sy * self.w + sx;
                        for (a, v) in sum.iter_mut().zip(self.rgb[i]) {
                            *a += v;
                        }
                        n += 1.0;
                        any_hole |= self.hole[i];
                    }
                }
                rgb.push(sum.map(|s| s / n));
                hole.push(any_hole);
            }
        }
        Level { w, h, rgb, hole }
    }

    #[inline]
    fn valid(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.w && (y as usize) < self.h && !self.hole[y as usize * self.w + x as usize]
    }

    fn valid_centers(&self) -> Vec<usize> {
        (0..self.w * self.h).filter(|&i| !self.hole[i]).collect()
    }

    /// Masked SSD between the patch at `(px, py)` and the one at `(sx, sy)`.
    /// Stops early once the running sum exceeds `bound`.
    fn cost(&self, px: i64, py: i64, sx: i64, sy: i64, radius: i64, bound: f32) -> f32 {
        let mut cost = 0.0f32;
        for dy in -radius..=radius {
            let ty = py + dy;
            if ty < 0 || ty >= self.h as i64 {
                continue;
            }
            for dx in -radius..=radius {
                let tx = px + dx;
                if tx < 0 || tx >= self.w as i64 {
                    continue;
                }
                let ti = ty as usize * self.w + tx as usize;
                if self.hole[ti] {
                    continue;
                }
                if self.valid(sx + dx, sy + dy) {
                    let s = self.rgb[(sy + dy) as usize * self.w + (sx + dx) as usize];
                    let t = self.rgb[ti];
                    cost += (t[0] - s[0]).powi(2) + (t[1] - s[1]).powi(2) + (t[2] - s[2]).powi(2);
                } else {
                    cost += MISSING_SOURCE_PENALTY;
                }
            }
            if cost > bound {
                return cost;
            }
        }
        cost
    }
}

#[derive(Clone, Copy)]
struct Match {
    sx: i64,
    sy: i64,
    cost: f32,
}

struct LevelField {
    /// pixel indices of hole pixels, row-major
    pixels: Vec<usize>,
    /// pixel index -> slot in `pixels`, or `usize::MAX`
    slot: Vec<usize>,
    matches: Vec<Match>,
}

const INIT_STREAM: u64 = 0xffff_ffff;

fn stream_id(level: usize, round: u64) -> u64 {
    ((level as u64) << 32) | round
}

fn random_valid(valid: &[usize], w: usize, seed: u64, level: usize, pixel: usize) -> (i64, i64) {
    let mut rng = stream_rng(seed, stream_id(level, INIT_STREAM), pixel as u64);
    let c = valid[rng.gen_range(0..valid.len())];
    ((c % w) as i64, (c / w) as i64)
}

fn new_field(level: &Level) -> LevelField {
    let pixels: Vec<usize> = (0..level.w * level.h).filter(|&i| level.hole[i]).collect();
    let mut slot = vec![usize::MAX; level.w * level.h];
    for (s, &p) in pixels.iter().enumerate() {
        slot[p] = s;
    }
    LevelField {
        pixels,
        slot,
        matches: Vec::new(),
    }
}

fn init_random(level: &Level, li: usize, radius: i64, seed: u64) -> LevelField {
    let mut f = new_field(level);
    let valid = level.valid_centers();
    f.matches = f
        .pixels
        .iter()
        .map(|&p| {
            let (px, py) = ((p % level.w) as i64, (p / level.w) as i64);
            let (sx, sy) = random_valid(&valid, level.w, seed, li, p);
            let cost = level.cost(px, py, sx, sy, radius, f32::INFINITY);
            Match { sx, sy, cost }
        })
        .collect();
    f
}

fn upsample_field(coarse: &LevelField, cw: usize, level: &Level, li: usize, radius: i64, seed: u64) -> LevelField {
    let mut f = new_field(level);
    let valid = level.valid_centers();
    f.matches = f
        .pixels
        .iter()
        .map(|&p| {
            let (px, py) = ((p % level.w) as i64, (p / level.w) as i64);
            let cs = coarse.slot[(py as usize / 2) * cw + px as usize / 2];
            let guess = (cs != usize::MAX).then(|| {
                let m = coarse.matches[cs];
                let (cx, cy) = (px / 2, py / 2);
                (px + 2 * (m.sx - cx), py + 2 * (m.sy - cy))
            });
            let (sx, sy) = match guess {
                Some((sx, sy)) if level.valid(sx, sy) => (sx, sy),
                _ => random_valid(&valid, level.w, seed, li, p),
            };
            let cost = level.cost(px, py, sx, sy, radius, f32::INFINITY);
            Match { sx, sy, cost }
        })
        .collect();
    f
}

fn propagate(level: &Level, f: &mut LevelField, radius: i64, forward: bool) {
    let w = level.w;
    let n = f.pixels.len();
    let step: i64 = if forward { -1 } else { 1 };
    for k in 0..n {
        let s = if forward { k } else { n - 1 - k };
        let p = f.pixels[s];
        let (px, py) = ((p % w) as i64, (p / w) as i64);
        for (nx, ny) in [(px + step, py), (px, py + step)] {
            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= level.h as i64 {
                continue;
            }
            let ns = f.slot[ny as usize * w + nx as usize];
            if ns == usize::MAX {
                continue;
            }
            let nm = f.matches[ns];
            let (sx, sy) = (nm.sx + (px - nx), nm.sy + (py - ny));
            if !level.valid(sx, sy) {
                continue;
            }
            let cur = f.matches[s];
            if (sx, sy) == (cur.sx, cur.sy) {
                continue;
            }
            let cost = level.cost(px, py, sx, sy, radius, cur.cost);
            // ties move too, so matches stay coherent across patches with no known pixels
            if cost <= cur.cost {
                f.matches[s] = Match { sx, sy, cost };
            }
        }
    }
}

fn random_search(level: &Level, f: &mut LevelField, li: usize, round: u64, radius: i64, p: &InpaintParams) {
    let w = level.w;
    let start = level.w.max(level.h) as f32;
    let stream = stream_id(li, round);
    let pixels = &f.pixels;
    f.matches.par_iter_mut().enumerate().for_each(|(s, m)| {
        let pix = pixels[s];
        let (px, py) = ((pix % w) as i64, (pix / w) as i64);
        let mut rng = stream_rng(p.seed, stream, pix as u64);
        let mut r = start;
        while r >= 1.0 {
            let ri = r as i64;
            let sx = (m.sx + rng.gen_range(-ri..=ri)).clamp(0, level.w as i64 - 1);
            let sy = (m.sy + rng.gen_range(-ri..=ri)).clamp(0, level.h as i64 - 1);
            if level.valid(sx, sy) && (sx, sy) != (m.sx, m.sy) {
                let cost = level.cost(px, py, sx, sy, radius, m.cost);
                if cost < m.cost {
                    *m = Match { sx, sy, cost };
                }
            }
            r *= p.search_decay;
        }
    });
}

fn vote(img: &RasterImage, level: &Level, f: &LevelField, radius: i64, patch_area: f32) -> Vec<[f32; 4]> {
    let w = level.w;
    let denom = 2.0 * VOTE_SIGMA * VOTE_SIGMA * patch_area;
    let weights: Vec<f32> = f.matches.iter().map(|m| (-m.cost / denom).exp()).collect();
    f.pixels
        .par_iter()
        .map(|&pix| {
            let (px, py) = ((pix % w) as i64, (pix / w) as i64);
            let mut reference: Option<[f32; 4]> = None;
            let mut acc = [0.0f64; 4];
            let mut wsum = 0.0f64;
            for qy in py - radius..=py + radius {
                for qx in px - radius..=px + radius {
                    if qx < 0 || qy < 0 || qx >= w as i64 || qy >= level.h as i64 {
                        continue;
                    }
                    let qs = f.slot[qy as usize * w + qx as usize];
                    if qs == usize::MAX {
                        continue;
                    }
                    let m = f.matches[qs];
                    let (sx, sy) = (m.sx + (px - qx), m.sy + (py - qy));
                    if !level.valid(sx, sy) {
                        continue;
                    }
                    let c = img.pixel(sx as usize, sy as usize);
                    let r = *reference.get_or_insert(c);
                    let wq = weights[qs] as f64;
                    for ch in 0..4 {
                        acc[ch] += wq * (c[ch] - r[ch]) as f64;
                    }
                    wsum += wq;
                }
            }
            // the pixel's own match always votes, so `reference` is set
            let r = reference.expect("own match is valid");
            if wsum > 0.0 {
                std::array::from_fn(|ch| (r[ch] as f64 + acc[ch] / wsum) as f32)
            } else {
                r
            }
        })
        .collect()
}

/// Inpaint and also return the final full-resolution nearest-neighbour field.
pub fn inpaint_with_field(
    img: &RasterImage,
    hole: &AlphaMask,
    p: &InpaintParams,
) -> Result<(RasterImage, NearestNeighborField)> {
    p.validate()?;
    hole.require_binary()?;
    if hole.dims() != img.dims() {
        return Err(Error::SizeMismatch {
            expected: img.dims(),
            actual: hole.dims(),
        });
    }
    let holes = hole.count_nonzero();
    if holes == 0 {
        return Ok((img.clone(), NearestNeighborField::default()));
    }
    if holes == hole.data().len() {
        return Err(Error::HoleCoversImage);
    }

    let radius = (p.patch_size / 2) as i64;
    let mut pyramid = vec![Level::from_image(img, hole)];
    for _ in 1..p.levels_for(img.width(), img.height()) {
        let next = pyramid.last().unwrap().downsample();
        if next.hole.iter().all(|&h| h) || next.w < 2 || next.h < 2 {
            break;
        }
        pyramid.push(next);
    }

    let mut field: Option<(LevelField, usize)> = None;
    for li in (0..pyramid.len()).rev() {
        let level = &pyramid[li];
        let mut f = match field.take() {
            None => init_random(level, li, radius, p.seed),
            Some((coarse, cw)) => upsample_field(&coarse, cw, level, li, radius, p.seed),
        };
        for it in 0..p.iterations {
            propagate(level, &mut f, radius, it % 2 == 0);
            random_search(level, &mut f, li, it as u64, radius, p);
        }
        field = Some((f, level.w));
    }
    let (f, _) = field.expect("at least one level");
    let finest = &pyramid[0];

    let votes = vote(img, finest, &f, radius, (p.patch_size * p.patch_size) as f32);
    let mut data = img.data().to_vec();
    for (&pix, v) in f.pixels.iter().zip(&votes) {
        data[pix * 4..pix * 4 + 4].copy_from_slice(v);
    }
    let out = RasterImage::from_rgba(img.width(), img.height(), data)?;

    let w = finest.w;
    let nnf = NearestNeighborField {
        entries: f
            .pixels
            .iter()
            .zip(&f.matches)
            .map(|(&pix, m)| {
                let (x, y) = (pix % w, pix / w);
                NnfEntry {
                    x,
                    y,
                    dx: (m.sx - x as i64) as i32,
                    dy: (m.sy - y as i64) as i32,
                    cost: m.cost,
                }
            })
            .collect(),
    };
    Ok((out, nnf))
}

/// Fill the pixels where `hole` is 1. Pixels outside the hole are returned unchanged.
pub fn inpaint(img: &RasterImage, hole: &AlphaMask, p: &InpaintParams) -> Result<RasterImage> {
    inpaint_with_field(img, hole, p).map(|(out, _)| out)
}

/// The raw photo with the localized object removed.
pub fn pure_background(raw: &RasterImage, loc: &LocalizedObject, p: &InpaintParams) -> Result<RasterImage> {
    inpaint(raw, &loc.hole_mask, p)
}
