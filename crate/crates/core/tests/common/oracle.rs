//! Independent brute-force references. Nothing here calls into the code under
//! test except for plain data accessors.

use movelike::inpaint::NearestNeighborField;
use movelike::{AlphaMask, RasterImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PENALTY: f64 = 3.0;

#[derive(Debug, Clone, Copy)]
pub struct OracleMatch {
    pub x: usize,
    pub y: usize,
    pub sx: usize,
    pub sy: usize,
    pub cost: f64,
}

fn known(hole: &AlphaMask, x: i64, y: i64) -> bool {
    x >= 0 && y >= 0 && (x as usize) < hole.width() && (y as usize) < hole.height() && hole.get(x as usize, y as usize) == 0.0
}

/// Masked SSD: hole pixels of the target patch are skipped; unusable source
/// pixels under a known target pixel cost a fixed penalty.
pub fn patch_cost(img: &RasterImage, hole: &AlphaMask, p: (usize, usize), s: (usize, usize), patch: usize) -> f64 {
    let r = (patch / 2) as i64;
    let mut cost = 0.0;
    for dy in -r..=r {
        for dx in -r..=r {
            let (tx, ty) = (p.0 as i64 + dx, p.1 as i64 + dy);
            if !known(hole, tx, ty) {
                continue;
            }
            let (sx, sy) = (s.0 as i64 + dx, s.1 as i64 + dy);
            if !known(hole, sx, sy) {
                cost += PENALTY;
                continue;
            }
            let a = img.pixel(tx as usize, ty as usize);
            let b = img.pixel(sx as usize, sy as usize);
            cost += (0..3).map(|c| ((a[c] - b[c]) as f64).powi(2)).sum::<f64>();
        }
    }
    cost
}

fn hole_pixels(hole: &AlphaMask) -> Vec<(usize, usize)> {
    (0..hole.height())
        .flat_map(|y| (0..hole.width()).map(move |x| (x, y)))
        .filter(|&(x, y)| hole.get(x, y) != 0.0)
        .collect()
}

/// Exhaustive best match per hole pixel; ties go to the shortest offset, then
/// to the first source in row-major order.
pub fn exhaustive_nnf(img: &RasterImage, hole: &AlphaMask, patch: usize) -> Vec<OracleMatch> {
    let sources: Vec<(usize, usize)> = (0..hole.height())
        .flat_map(|y| (0..hole.width()).map(move |x| (x, y)))
        .filter(|&(x, y)| hole.get(x, y) == 0.0)
        .collect();
    hole_pixels(hole)
        .into_iter()
        .map(|(x, y)| {
            let mut best: Option<(f64, i64, (usize, usize))> = None;
            for &s in &sources {
                let c = patch_cost(img, hole, (x, y), s, patch);
                let d2 = (s.0 as i64 - x as i64).pow(2) + (s.1 as i64 - y as i64).pow(2);
                let better = match best {
                    None => true,
                    Some((bc, bd, _)) => c < bc || (c == bc && d2 < bd),
                };
                if better {
                    best = Some((c, d2, s));
                }
            }
            let (cost, _, (sx, sy)) = best.unwrap();
            OracleMatch { x, y, sx, sy, cost }
        })
        .collect()
}

/// Weighted patch voting, weight `exp(-cost / (2 * 0.1^2 * patch_area))`.
pub fn vote(img: &RasterImage, hole: &AlphaMask, nnf: &[OracleMatch], patch: usize) -> RasterImage {
    let r = (patch / 2) as i64;
    let area = (patch * patch) as f64;
    let mut out = img.clone();
    for m in nnf {
        let mut acc = [0.0f64; 4];
        let mut wsum = 0.0;
        for q in nnf {
            let (dx, dy) = (m.x as i64 - q.x as i64, m.y as i64 - q.y as i64);
            if dx.abs() > r || dy.abs() > r {
                continue;
            }
            let (sx, sy) = (q.sx as i64 + dx, q.sy as i64 + dy);
            if !known(hole, sx, sy) {
                continue;
            }
            let w = (-q.cost / (2.0 * 0.01 * area)).exp();
            let c = img.pixel(sx as usize, sy as usize);
            for ch in 0..4 {
                acc[ch] += w * c[ch] as f64;
            }
            wsum += w;
        }
        out.set_pixel(m.x, m.y, acc.map(|a| (a / wsum) as f32));
    }
    out
}

pub fn total_cost(img: &RasterImage, hole: &AlphaMask, nnf: &NearestNeighborField, patch: usize) -> f64 {
    nnf.entries
        .iter()
        .map(|e| {
            let s = ((e.x as i64 + e.dx as i64) as usize, (e.y as i64 + e.dy as i64) as usize);
            patch_cost(img, hole, (e.x, e.y), s, patch)
        })
        .sum()
}

pub fn hole_mae(a: &RasterImage, b: &RasterImage, hole: &AlphaMask) -> f64 {
    let px = hole_pixels(hole);
    let sum: f64 = px
        .iter()
        .map(|&(x, y)| {
            let (p, q) = (a.pixel(x, y), b.pixel(x, y));
            (0..3).map(|c| (p[c] - q[c]).abs() as f64).sum::<f64>()
        })
        .sum();
    sum / (3 * px.len()) as f64
}

/// Random periodic tile plus mild noise.
pub fn texture(w: usize, h: usize, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (tw, th) = (rng.gen_range(3..=6), rng.gen_range(3..=6));
    let tile: Vec<[f32; 3]> = (0..tw * th).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
    let noise: Vec<[f32; 3]> = (0..w * h)
        .map(|_| [rng.gen_range(-0.02..0.02), rng.gen_range(-0.02..0.02), rng.gen_range(-0.02..0.02)])
        .collect();
    RasterImage::from_fn(w, h, |x, y| {
        let t = tile[(y % th) * tw + x % tw];
        let n = noise[y * w + x];
        [t[0] + n[0], t[1] + n[1], t[2] + n[2], 1.0]
    })
    .unwrap()
}

pub fn random_hole(w: usize, h: usize, seed: u64) -> AlphaMask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let (hw, hh) = (rng.gen_range(5..=10), rng.gen_range(5..=10));
    let x0 = rng.gen_range(3..w - hw - 3);
    let y0 = rng.gen_range(3..h - hh - 3);
    AlphaMask::from_fn(w, h, |x, y| ((x0..x0 + hw).contains(&x) && (y0..y0 + hh).contains(&y)) as u8 as f32).unwrap()
}

pub fn assert_identity_outside(input: &RasterImage, output: &RasterImage, hole: &AlphaMask) {
    for y in 0..input.height() {
        for x in 0..input.width() {
            if hole.get(x, y) == 0.0 {
                assert_eq!(input.pixel(x, y), output.pixel(x, y), "changed known pixel ({x},{y})");
            }
        }
    }
}

pub fn assert_within_known_range(input: &RasterImage, output: &RasterImage, hole: &AlphaMask) {
    let mut lo = [f32::INFINITY; 4];
    let mut hi = [f32::NEG_INFINITY; 4];
    for y in 0..input.height() {
        for x in 0..input.width() {
            if hole.get(x, y) == 0.0 {
                let p = input.pixel(x, y);
                for c in 0..4 {
                    lo[c] = lo[c].min(p[c]);
                    hi[c] = hi[c].max(p[c]);
                }
            }
        }
    }
    for y in 0..input.height() {
        for x in 0..input.width() {
            let p = output.pixel(x, y);
            for c in 0..4 {
                assert!(p[c] >= lo[c] && p[c] <= hi[c], "({x},{y}) channel {c} = {} outside [{}, {}]", p[c], lo[c], hi[c]);
            }
        }
    }
}

pub fn brute_distance(mask: &AlphaMask) -> Vec<f64> {
    let (w, h) = mask.dims();
    let zeros: Vec<(i64, i64)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| mask.get(x, y) == 0.0)
        .map(|(x, y)| (x as i64, y as i64))
        .collect();
    (0..h)
        .flat_map(|y| (0..w).map(move |x| (x as i64, y as i64)))
        .map(|(x, y)| {
            zeros
                .iter()
                .map(|&(zx, zy)| (((x - zx).pow(2) + (y - zy).pow(2)) as f64).sqrt())
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn kernel_value(kernel: movelike::raster::Kernel, x: f64) -> f64 {
    use movelike::raster::Kernel;
    let ax = x.abs();
    match kernel {
        Kernel::Nearest => unreachable!("nearest is an index pick"),
        Kernel::Bilinear => (1.0 - ax).max(0.0),
        Kernel::Bicubic => {
            let a = -0.5;
            if ax < 1.0 {
                (a + 2.0) * ax.powi(3) - (a + 3.0) * ax.powi(2) + 1.0
            } else if ax < 2.0 {
                a * ax.powi(3) - 5.0 * a * ax.powi(2) + 8.0 * a * ax - 4.0 * a
            } else {
                0.0
            }
        }
        Kernel::Lanczos3 => {
            if ax == 0.0 {
                1.0
            } else if ax < 3.0 {
                let px = std::f64::consts::PI * x;
                (px.sin() / px) * ((px / 3.0).sin() / (px / 3.0))
            } else {
                0.0
            }
        }
    }
}

/// Normalized 1-D weights per source index (borders clamped) for one output sample.
fn weights_1d(kernel: movelike::raster::Kernel, n_in: usize, n_out: usize, o: usize) -> Vec<f64> {
    let scale = n_in as f64 / n_out as f64;
    let centre = (o as f64 + 0.5) * scale;
    let mut w = vec![0.0; n_in];
    if kernel == movelike::raster::Kernel::Nearest {
        w[(centre.floor() as usize).min(n_in - 1)] = 1.0;
        return w;
    }
    let stretch = scale.max(1.0);
    // wide enough for any kernel support
    for j in -(4 * stretch as i64 + 8)..(n_in as i64 + 4 * stretch as i64 + 8) {
        let v = kernel_value(kernel, (j as f64 + 0.5 - centre) / stretch);
        w[j.clamp(0, n_in as i64 - 1) as usize] += v;
    }
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

/// Direct double-sum resampling, clamped to [0, 1].
pub fn brute_resample(img: &RasterImage, out_w: usize, out_h: usize, kernel: movelike::raster::Kernel) -> Vec<[f64; 4]> {
    let (w, h) = img.dims();
    let mut out = Vec::with_capacity(out_w * out_h);
    for oy in 0..out_h {
        let wy = weights_1d(kernel, h, out_h, oy);
        for ox in 0..out_w {
            let wx = weights_1d(kernel, w, out_w, ox);
            let mut acc = [0.0f64; 4];
            for (y, &ky) in wy.iter().enumerate() {
                for (x, &kx) in wx.iter().enumerate() {
                    let p = img.pixel(x, y);
                    for c in 0..4 {
                        acc[c] += ky * kx * p[c] as f64;
                    }
                }
            }
            out.push(acc.map(|v| v.clamp(0.0, 1.0)));
        }
    }
    out
}
