//! Motion laws checked on seeded random configurations. Each check returns a
//! description of the first violation.

use movelike::motion::{
    animate_frame, displacement_at, frame_transforms, motion_weights, pixel_to_norm, Keypoint, Mat2, MotionFrame,
    MotionMode, MotionParams, WARP_FILL,
};
use movelike::{AlphaMask, RasterImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Side of the test crop; `SIDE - 1` is a power of two so pixel steps are exact.
pub const SIDE: usize = 65;
/// Normalized length of one pixel step.
pub const STEP: f64 = 2.0 / (SIDE - 1) as f64;

pub struct Config {
    pub src: MotionFrame,
    pub drv: MotionFrame,
    pub drv_first: MotionFrame,
    pub params: MotionParams,
    pub crop: RasterImage,
    pub mask: AlphaMask,
}

fn jacobian(rng: &mut ChaCha8Rng) -> Option<Mat2> {
    if rng.gen_bool(0.3) {
        return None;
    }
    loop {
        let j = [
            [rng.gen_range(0.6..1.4), rng.gen_range(-0.4..0.4)],
            [rng.gen_range(-0.4..0.4), rng.gen_range(0.6..1.4)],
        ];
        if (j[0][0] * j[1][1] - j[0][1] * j[1][0]) > 0.2 {
            return Some(j);
        }
    }
}

/// Positions on the pixel lattice, so every coordinate difference is exact.
fn frame(rng: &mut ChaCha8Rng, k: usize) -> MotionFrame {
    MotionFrame {
        keypoints: (0..k)
            .map(|_| Keypoint {
                x: rng.gen_range(-24i32..=24) as f64 * STEP,
                y: rng.gen_range(-24i32..=24) as f64 * STEP,
                jacobian: jacobian(rng),
            })
            .collect(),
    }
}

/// Texture inside a transparent-white border of `border` pixels.
pub fn bordered_texture(rng: &mut ChaCha8Rng, border: usize) -> RasterImage {
    let cells: Vec<[f32; 4]> = (0..64)
        .map(|_| [rng.gen(), rng.gen(), rng.gen(), rng.gen_range(0.5..1.0)])
        .collect();
    RasterImage::from_fn(SIDE, SIDE, |x, y| {
        if x < border || y < border || x >= SIDE - border || y >= SIDE - border {
            WARP_FILL
        } else {
            let c = cells[(y / 7 % 8) * 8 + x / 7 % 8];
            let t = ((x * 13 + y * 7) % 11) as f32 / 40.0;
            [c[0] * (1.0 - t), c[1], (c[2] + t).min(1.0), c[3]]
        }
    })
    .unwrap()
}

pub fn random_config(seed: u64) -> Config {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(1..=5);
    let src = frame(&mut rng, k);
    let drv = frame(&mut rng, k);
    let drv_first = frame(&mut rng, k);
    let params = MotionParams {
        sigma: rng.gen_range(0.08..0.35),
        bg_weight: if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.01..1.0) },
    };
    let crop = bordered_texture(&mut rng, 8);
    let mask = crop.channel(3);
    Config {
        src,
        drv,
        drv_first,
        params,
        crop,
        mask,
    }
}

fn grid() -> impl Iterator<Item = [f64; 2]> {
    (0..SIDE).flat_map(|y| (0..SIDE).map(move |x| [pixel_to_norm(x as f64, SIDE), pixel_to_norm(y as f64, SIDE)]))
}

pub fn weight_normalization(c: &Config) -> Result<(), String> {
    for mode in [MotionMode::Absolute, MotionMode::Relative] {
        let ts = frame_transforms(&c.src, &c.drv, &c.drv_first, mode).map_err(|e| e.to_string())?;
        for z in grid() {
            let w = motion_weights(&ts, z, &c.params);
            let s: f64 = w.iter().sum();
            if (s - 1.0).abs() > 1e-6 || w.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(format!("weights at {z:?} sum to {s}"));
            }
        }
    }
    Ok(())
}

pub fn identity_law(c: &Config) -> Result<(), String> {
    let cases = [
        (&c.src, &c.src, MotionMode::Absolute),
        (&c.drv, &c.drv, MotionMode::Relative),
    ];
    for (drv, first, mode) in cases {
        let out = animate_frame(&c.crop, &c.mask, &c.src, drv, first, mode, &c.params).map_err(|e| e.to_string())?;
        if out.image != c.crop {
            return Err(format!("{mode:?}: frame differs from the crop"));
        }
        if out.mask != c.mask {
            return Err(format!("{mode:?}: mask differs from the crop mask"));
        }
    }
    Ok(())
}

/// Place keypoints at least `6 sigma` apart and compare the blended field at
/// each anchor with that keypoint's own transform.
pub fn keypoint_interpolation(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let sigma = rng.gen_range(0.05..0.12);
    let k = rng.gen_range(1..=3);
    let mut pts: Vec<(f64, f64)> = Vec::new();
    while pts.len() < k {
        let p = (rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9));
        if pts.iter().all(|q| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt() >= 6.0 * sigma) {
            pts.push(p);
        }
    }
    let src = MotionFrame {
        keypoints: pts
            .iter()
            .map(|&(x, y)| Keypoint {
                x: x + rng.gen_range(-0.1..0.1),
                y: y + rng.gen_range(-0.1..0.1),
                jacobian: jacobian(&mut rng),
            })
            .collect(),
    };
    let drv = MotionFrame {
        keypoints: pts
            .iter()
            .map(|&(x, y)| Keypoint {
                x,
                y,
                jacobian: jacobian(&mut rng),
            })
            .collect(),
    };
    let p = MotionParams { sigma, bg_weight: 0.0 };
    let ts = frame_transforms(&src, &drv, &drv, MotionMode::Absolute).map_err(|e| e.to_string())?;
    for t in &ts {
        let d = displacement_at(&ts, t.anchor, &p);
        let got = [t.anchor[0] + d[0], t.anchor[1] + d[1]];
        let want = t.apply(t.anchor);
        let err = (got[0] - want[0]).abs().max((got[1] - want[1]).abs());
        if err > 1e-3 {
            return Err(format!("field at anchor {:?} off by {err}", t.anchor));
        }
    }
    Ok(())
}

fn shifted(frame: &MotionFrame, n: (i64, i64)) -> MotionFrame {
    MotionFrame {
        keypoints: frame
            .keypoints
            .iter()
            .map(|k| Keypoint {
                x: k.x + n.0 as f64 * STEP,
                y: k.y + n.1 as f64 * STEP,
                ..*k
            })
            .collect(),
    }
}

fn shift_image(img: &RasterImage, n: (i64, i64)) -> RasterImage {
    RasterImage::from_fn(img.width(), img.height(), |x, y| {
        let (sx, sy) = (x as i64 - n.0, y as i64 - n.1);
        if sx < 0 || sy < 0 || sx >= img.width() as i64 || sy >= img.height() as i64 {
            WARP_FILL
        } else {
            img.pixel(sx as usize, sy as usize)
        }
    })
    .unwrap()
}

/// Shift content and all keypoints by an integer pixel offset; the output must
/// shift by the same offset, bit for bit.
pub fn translation_equivariance(c: &Config, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xe9);
    let n = (rng.gen_range(-4i64..=4), rng.gen_range(-4i64..=4));
    let crop2 = shift_image(&c.crop, n);
    let mask2 = crop2.channel(3);
    for mode in [MotionMode::Absolute, MotionMode::Relative] {
        let a = animate_frame(&c.crop, &c.mask, &c.src, &c.drv, &c.drv_first, mode, &c.params)
            .map_err(|e| e.to_string())?;
        let b = animate_frame(
            &crop2,
            &mask2,
            &shifted(&c.src, n),
            &shifted(&c.drv, n),
            &shifted(&c.drv_first, n),
            mode,
            &c.params,
        )
        .map_err(|e| e.to_string())?;
        for y in 0..SIDE as i64 {
            for x in 0..SIDE as i64 {
                let (tx, ty) = (x + n.0, y + n.1);
                if tx < 0 || ty < 0 || tx >= SIDE as i64 || ty >= SIDE as i64 {
                    continue;
                }
                let (pa, pb) = (a.image.pixel(x as usize, y as usize), b.image.pixel(tx as usize, ty as usize));
                if pa != pb {
                    return Err(format!("{mode:?}, shift {n:?}: pixel ({x},{y}) {pa:?} vs {pb:?}"));
                }
            }
        }
    }
    Ok(())
}
