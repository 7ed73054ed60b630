//! First-order keypoint motion transfer.
//!
//! Each keypoint carries a position and a 2x2 local Jacobian. For every
//! driving frame the keypoints define K local affine maps from driving-frame
//! coordinates back into the source crop. Gaussian weights around the
//! keypoints blend those maps (plus an identity map for the background) into
//! a dense backward field, and the crop is bilinearly resampled through it.
//!
//! Coordinates are normalized: x to the right, y down, origin at the image
//! centre, with pixel centres `0` and `n - 1` landing on `-1` and `+1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{AlphaMask, RasterImage, Rgba};

pub type Mat2 = [[f64; 2]; 2];
pub type Vec2 = [f64; 2];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];
/// Jacobians with `|det|` at or below this are rejected.
pub const MIN_ABS_DET: f64 = 1e-6;
/// Fractional sample offsets closer than this to a pixel centre are snapped to it.
const SNAP: f64 = 1e-6;

fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn inverse(m: &Mat2) -> Mat2 {
    let d = det(m);
    [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]
}

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Normalized coordinate of pixel centre `i` along an axis of `n` pixels.
#[inline]
pub fn pixel_to_norm(i: f64, n: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        2.0 * i / (n - 1) as f64 - 1.0
    }
}

#[inline]
pub fn norm_to_pixel(v: f64, n: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        (v + 1.0) / 2.0 * (n - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jacobian: Option<Mat2>,
}

impl Keypoint {
    pub fn at(x: f64, y: f64) -> Self {
        Keypoint { x, y, jacobian: None }
    }

    #[inline]
    pub fn position(&self) -> Vec2 {
        [self.x, self.y]
    }

    #[inline]
    pub fn jacobian(&self) -> Mat2 {
        self.jacobian.unwrap_or(IDENTITY)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionFrame {
    pub keypoints: Vec<Keypoint>,
}

impl MotionFrame {
    pub fn len(&self) -> usize {
        self.keypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keypoints.is_empty()
    }

    /// Check finiteness and Jacobian invertibility.
    pub fn validate(&self) -> Result<()> {
        for (i, kp) in self.keypoints.iter().enumerate() {
            if !kp.x.is_finite() || !kp.y.is_finite() {
                return Err(Error::InvalidSequence(format!("keypoint {i} has a non-finite position")));
            }
            if let Some(j) = &kp.jacobian {
                if j.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidSequence(format!("keypoint {i} has a non-finite jacobian")));
                }
                let d = det(j);
                if d.abs() <= MIN_ABS_DET {
                    return Err(Error::SingularJacobian { index: i, det: d });
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let frame: MotionFrame = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "keypoint file".into(),
            source,
        })?;
        if frame.is_empty() {
            return Err(Error::InvalidSequence("keypoint file lists no keypoints".into()));
        }
        frame.validate()?;
        Ok(frame)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotionMode {
    /// Driving positions are used as-is.
    Absolute,
    /// Only motion relative to the first driving frame is transferred.
    #[default]
    Relative,
}

/// A driving pose sequence. The JSON form is
/// `{"version": 1, "num_keypoints": K, "fps": f, "mode": "relative", "frames": [{"keypoints": [...]}, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrivingSequence {
    pub version: u32,
    pub num_keypoints: usize,
    pub fps: f64,
    pub mode: MotionMode,
    pub frames: Vec<MotionFrame>,
}

impl DrivingSequence {
    pub fn new(fps: f64, mode: MotionMode, frames: Vec<MotionFrame>) -> Result<Self> {
        let seq = DrivingSequence {
            version: 1,
            num_keypoints: frames.first().map_or(0, MotionFrame::len),
            fps,
            mode,
            frames,
        };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != 1 {
            return Err(Error::InvalidSequence(format!("unsupported version {}", self.version)));
        }
        if self.num_keypoints < 1 {
            return Err(Error::InvalidSequence("num_keypoints must be >= 1".into()));
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(Error::InvalidSequence(format!("fps must be positive, got {}", self.fps)));
        }
        if self.frames.is_empty() {
            return Err(Error::InvalidSequence("sequence has no frames".into()));
        }
        for (t, f) in self.frames.iter().enumerate() {
            if f.len() != self.num_keypoints {
                return Err(Error::InvalidSequence(format!(
                    "frame {t} has {} keypoints, expected {}",
                    f.len(),
                    self.num_keypoints
                )));
            }
            f.validate()?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let seq: DrivingSequence = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "driving sequence".into(),
            source,
        })?;
        seq.validate()?;
        Ok(seq)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sequence serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionParams {
    /// Gaussian radius of keypoint influence, in normalized units.
    pub sigma: f64,
    /// Unnormalized weight of the identity (background) transform.
    pub bg_weight: f64,
}

impl Default for MotionParams {
    fn default() -> Self {
        MotionParams {
            sigma: 0.15,
            bg_weight: 0.3,
        }
    }
}

impl MotionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::params(format!("motion.sigma must be > 0, got {}", self.sigma)));
        }
        if !(self.bg_weight >= 0.0 && self.bg_weight.is_finite()) {
            return Err(Error::params(format!("motion.bg_weight must be >= 0, got {}", self.bg_weight)));
        }
        Ok(())
    }
}

/// `T(z) = offset + linear * (z - anchor)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTransform {
    pub linear: Mat2,
    pub offset: Vec2,
    pub anchor: Vec2,
}

impl AffineTransform {
    pub fn apply(&self, z: Vec2) -> Vec2 {
        let d = self.displacement(z);
        [z[0] + d[0], z[1] + d[1]]
    }

    /// `T(z) - z`, computed from differences only so a joint translation of
    /// `z`, the anchor and the offset leaves it unchanged.
    pub fn displacement(&self, z: Vec2) -> Vec2 {
        let rel = [z[0] - self.anchor[0], z[1] - self.anchor[1]];
        let l = &self.linear;
        [
            (self.offset[0] - self.anchor[0]) + ((l[0][0] - 1.0) * rel[0] + l[0][1] * rel[1]),
            (self.offset[1] - self.anchor[1]) + (l[1][0] * rel[0] + (l[1][1] - 1.0) * rel[1]),
        ]
    }
}

fn check_count(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::KeypointCountMismatch { expected, actual });
    }
    Ok(())
}

fn inverse_checked(kp: &Keypoint, index: usize) -> Result<Mat2> {
    let j = kp.jacobian();
    let d = det(&j);
    if d.abs() <= MIN_ABS_DET || !d.is_finite() {
        return Err(Error::SingularJacobian { index, det: d });
    }
    Ok(inverse(&j))
}

/// Per-keypoint affine maps from driving-frame coordinates to source coordinates.
pub fn frame_transforms(
    src: &MotionFrame,
    drv: &MotionFrame,
    drv_first: &MotionFrame,
    mode: MotionMode,
) -> Result<Vec<AffineTransform>> {
    check_count(src.len(), drv.len())?;
    check_count(src.len(), drv_first.len())?;
    src.keypoints
        .iter()
        .zip(&drv.keypoints)
        .zip(&drv_first.keypoints)
        .enumerate()
        .map(|(k, ((s, d), d0))| {
            let drv_inv = inverse_checked(d, k)?;
            let sp = s.position();
            Ok(match mode {
                MotionMode::Absolute => AffineTransform {
                    linear: mul(&s.jacobian(), &drv_inv),
                    offset: sp,
                    anchor: d.position(),
                },
                MotionMode::Relative => {
                    // src.J (drv.J drv_first.J^-1 src.J)^-1 reduces to drv_first.J drv.J^-1
                    let anchor = [sp[0] + (d.x - d0.x), sp[1] + (d.y - d0.y)];
                    AffineTransform {
                        linear: mul(&d0.jacobian(), &drv_inv),
                        offset: sp,
                        anchor,
                    }
                }
            })
        })
        .collect()
}

/// Normalized blending weights at `z`: index 0 is the background, `1..=K` the keypoints.
pub fn motion_weights(transforms: &[AffineTransform], z: Vec2, p: &MotionParams) -> Vec<f64> {
    let inv_two_sigma2 = 1.0 / (2.0 * p.sigma * p.sigma);
    let mut logs = Vec::with_capacity(transforms.len() + 1);
    logs.push(if p.bg_weight > 0.0 { p.bg_weight.ln() } else { f64::NEG_INFINITY });
    for t in transforms {
        let dx = z[0] - t.anchor[0];
        let dy = z[1] - t.anchor[1];
        logs.push(-(dx * dx + dy * dy) * inv_two_sigma2);
    }
    // shift by the max exponent so far-away pixels do not underflow to 0/0
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = logs.iter().map(|&l| (l - m).exp()).collect();
    let sum: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= sum);
    w
}

/// Field displacement `T(z) - z` at one normalized point.
pub fn displacement_at(transforms: &[AffineTransform], z: Vec2, p: &MotionParams) -> Vec2 {
    let w = motion_weights(transforms, z, p);
    let mut d = [0.0, 0.0];
    for (t, wk) in transforms.iter().zip(&w[1..]) {
        if *wk == 0.0 {
            continue;
        }
        let dk = t.displacement(z);
        d[0] += wk * dk[0];
        d[1] += wk * dk[1];
    }
    d
}

/// The blended backward map `T(z) = w_0 z + sum_k w_k T_k(z)` at one point.
pub fn field_at(transforms: &[AffineTransform], z: Vec2, p: &MotionParams) -> Vec2 {
    let d = displacement_at(transforms, z, p);
    [z[0] + d[0], z[1] + d[1]]
}

/// Dense backward sampling map, stored as per-pixel displacement in normalized units.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMotionField {
    width: usize,
    height: usize,
    displacement: Vec<Vec2>,
}

impl DenseMotionField {
    pub fn identity(width: usize, height: usize) -> Self {
        DenseMotionField {
            width,
            height,
            displacement: vec![[0.0, 0.0]; width * height],
        }
    }

    /// Build from a closure returning `T(z)` in normalized coordinates.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(Vec2) -> Vec2) -> Self {
        let mut displacement = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let z = [pixel_to_norm(x as f64, width), pixel_to_norm(y as f64, height)];
                let t = f(z);
                displacement.push([t[0] - z[0], t[1] - z[1]]);
            }
        }
        DenseMotionField {
            width,
            height,
            displacement,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn displacement(&self, x: usize, y: usize) -> Vec2 {
        self.displacement[y * self.width + x]
    }

    /// `T(z)` for pixel `(x, y)`.
    pub fn coord(&self, x: usize, y: usize) -> Vec2 {
        let d = self.displacement(x, y);
        [
            pixel_to_norm(x as f64, self.width) + d[0],
            pixel_to_norm(y as f64, self.height) + d[1],
        ]
    }
}

/// Evaluate the blended field at every pixel of an `out_w x out_h` grid.
pub fn dense_motion(
    transforms: &[AffineTransform],
    drv: &MotionFrame,
    p: &MotionParams,
    out_w: usize,
    out_h: usize,
) -> Result<DenseMotionField> {
    check_count(drv.len(), transforms.len())?;
    p.validate()?;
    let displacement = (0..out_h)
        .into_par_iter()
        .flat_map_iter(|y| {
            let zy = pixel_to_norm(y as f64, out_h);
            (0..out_w).map(move |x| displacement_at(transforms, [pixel_to_norm(x as f64, out_w), zy], p))
        })
        .collect();
    Ok(DenseMotionField {
        width: out_w,
        height: out_h,
        displacement,
    })
}

/// Integer part and snapped fractional part of a pixel displacement.
#[inline]
fn split(d: f64) -> (i64, f64) {
    let mut m = d.floor();
    let mut t = d - m;
    if t < SNAP {
        t = 0.0;
    } else if t > 1.0 - SNAP {
        m += 1.0;
        t = 0.0;
    }
    (m as i64, t)
}

fn warp_planar(data: &[f32], w: usize, h: usize, ch: usize, field: &DenseMotionField, fill: &[f32]) -> Vec<f32> {
    let sx_scale = if w > 1 { (w - 1) as f64 / 2.0 } else { 0.0 };
    let sy_scale = if h > 1 { (h - 1) as f64 / 2.0 } else { 0.0 };
    let mut out = vec![0.0f32; w * h * ch];
    out.par_chunks_mut(w * ch).enumerate().for_each(|(y, row)| {
        for x in 0..w {
            let d = field.displacement(x, y);
            let (mx, tx) = split(d[0] * sx_scale);
            let (my, ty) = split(d[1] * sy_scale);
            let (bx, by) = (x as i64 + mx, y as i64 + my);
            let corners = [
                (bx, by, (1.0 - tx) * (1.0 - ty)),
                (bx + 1, by, tx * (1.0 - ty)),
                (bx, by + 1, (1.0 - tx) * ty),
                (bx + 1, by + 1, tx * ty),
            ];
            let mut acc = [0.0f64; 4];
            for (cx, cy, wgt) in corners {
                if wgt == 0.0 {
                    continue;
                }
                let inside = cx >= 0 && cy >= 0 && (cx as usize) < w && (cy as usize) < h;
                for c in 0..ch {
                    let v = if inside {
                        data[(cy as usize * w + cx as usize) * ch + c]
                    } else {
                        fill[c]
                    };
                    acc[c] += wgt * v as f64;
                }
            }
            for c in 0..ch {
                row[x * ch + c] = acc[c].clamp(0.0, 1.0) as f32;
            }
        }
    });
    out
}

fn check_field(dims: (usize, usize), field: &DenseMotionField) -> Result<()> {
    if dims != (field.width, field.height) {
        return Err(Error::SizeMismatch {
            expected: (field.width, field.height),
            actual: dims,
        });
    }
    Ok(())
}

/// Backward bilinear warp. Out-of-image corners contribute `fill`.
pub fn warp(img: &RasterImage, field: &DenseMotionField, fill: Rgba) -> Result<RasterImage> {
    check_field(img.dims(), field)?;
    let data = warp_planar(img.data(), img.width(), img.height(), 4, field, &fill);
    Ok(RasterImage::from_raw_unchecked(img.width(), img.height(), data))
}

pub fn warp_mask(mask: &AlphaMask, field: &DenseMotionField, fill: f32) -> Result<AlphaMask> {
    check_field(mask.dims(), field)?;
    let data = warp_planar(mask.data(), mask.width(), mask.height(), 1, field, &[fill]);
    Ok(AlphaMask::from_raw_unchecked(mask.width(), mask.height(), data))
}

/// Farthest-point keypoint placement over the foreground (`mask >= 0.5`).
///
/// The first point is the foreground pixel nearest the foreground centroid;
/// each next point maximizes its distance to the points already chosen.
/// Ties go to the earlier pixel in row-major order. `k` is clamped to the
/// number of foreground pixels.
pub fn auto_keypoints(mask: &AlphaMask, k: usize) -> Result<MotionFrame> {
    if k == 0 {
        return Err(Error::params("auto_keypoints needs k >= 1"));
    }
    let (w, h) = mask.dims();
    let fg: Vec<(i64, i64)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| mask.get(x, y) >= 0.5)
        .map(|(x, y)| (x as i64, y as i64))
        .collect();
    if fg.is_empty() {
        return Err(Error::ObjectNotFound);
    }
    let n = fg.len() as f64;
    let cx = fg.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let cy = fg.iter().map(|p| p.1 as f64).sum::<f64>() / n;
    let first = fg
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| (i, (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
        .0;

    let mut chosen = vec![first];
    let mut nearest: Vec<i64> = fg
        .iter()
        .map(|&(x, y)| (x - fg[first].0).pow(2) + (y - fg[first].1).pow(2))
        .collect();
    while chosen.len() < k.min(fg.len()) {
        let next = nearest
            .iter()
            .enumerate()
            .fold(0, |best, (i, &d)| if d > nearest[best] { i } else { best });
        chosen.push(next);
        let (nx, ny) = fg[next];
        for (d, &(x, y)) in nearest.iter_mut().zip(&fg) {
            *d = (*d).min((x - nx).pow(2) + (y - ny).pow(2));
        }
    }
    Ok(MotionFrame {
        keypoints: chosen
            .into_iter()
            .map(|i| Keypoint::at(pixel_to_norm(fg[i].0 as f64, w), pixel_to_norm(fg[i].1 as f64, h)))
            .collect(),
    })
}

/// One animation frame: the warped crop and its warped coverage.
#[derive(Debug, Clone, PartialEq)]
pub struct AnimatedFrame {
    pub image: RasterImage,
    pub mask: AlphaMask,
}

/// Transparent white, used for samples that leave the crop.
pub const WARP_FILL: Rgba = [1.0, 1.0, 1.0, 0.0];

pub fn animate_frame(
    crop: &RasterImage,
    crop_mask: &AlphaMask,
    src_kp: &MotionFrame,
    drv: &MotionFrame,
    drv_first: &MotionFrame,
    mode: MotionMode,
    p: &MotionParams,
) -> Result<AnimatedFrame> {
    let transforms = frame_transforms(src_kp, drv, drv_first, mode)?;
    let field = dense_motion(&transforms, drv, p, crop.width(), crop.height())?;
    Ok(AnimatedFrame {
        image: warp(crop, &field, WARP_FILL)?,
        mask: warp_mask(crop_mask, &field, 0.0)?,
    })
}

/// Warp the crop once per driving frame. Frames are independent and are
/// evaluated in parallel.
pub fn animate(
    crop: &RasterImage,
    crop_mask: &AlphaMask,
    src_kp: &MotionFrame,
    seq: &DrivingSequence,
    p: &MotionParams,
) -> Result<Vec<AnimatedFrame>> {
    seq.validate()?;
    p.validate()?;
    check_count(seq.num_keypoints, src_kp.len())?;
    src_kp.validate()?;
    if crop.dims() != crop_mask.dims() {
        return Err(Error::SizeMismatch {
            expected: crop.dims(),
            actual: crop_mask.dims(),
        });
    }
    let first = &seq.frames[0];
    seq.frames
        .par_iter()
        .map(|drv| animate_frame(crop, crop_mask, src_kp, drv, first, seq.mode, p))
        .collect()
}

/// Debug rendering of a field: hue encodes direction, saturation encodes
/// magnitude (relative to the largest displacement), and the driving anchors
/// are marked with black crosses.
pub fn render_field(field: &DenseMotionField, anchors: &[Vec2]) -> RasterImage {
    let (w, h) = (field.width, field.height);
    let max = field
        .displacement
        .iter()
        .map(|d| d[0].hypot(d[1]))
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let mut img = RasterImage::from_fn(w, h, |x, y| {
        let d = field.displacement(x, y);
        let hue = (d[1].atan2(d[0]) / std::f64::consts::TAU).rem_euclid(1.0);
        let sat = d[0].hypot(d[1]) / max;
        let rgb = hsv_to_rgb(hue, sat, 1.0);
        [rgb[0] as f32, rgb[1] as f32, rgb[2] as f32, 1.0]
    })
    .expect("field is at least 1x1");
    for a in anchors {
        let cx = norm_to_pixel(a[0], w).round() as i64;
        let cy = norm_to_pixel(a[1], h).round() as i64;
        for o in -3..=3i64 {
            for (x, y) in [(cx + o, cy), (cx, cy + o)] {
                if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h {
                    img.set_pixel(x as usize, y as usize, [0.0, 0.0, 0.0, 1.0]);
                }
            }
        }
    }
    img
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [f64; 3] {
    let i = (h * 6.0).floor();
    let f = h * 6.0 - i;
    let (p, q, t) = (v * (1.0 - s), v * (1.0 - f * s), v * (1.0 - (1.0 - f) * s));
    match i as i64 % 6 {
        0 => [v, t, p],
        1 => [q, v, p],
        2 => [p, v, t],
        3 => [p, q, v],
        4 => [t, p, v],
        _ => [v, p, q],
    }
}
