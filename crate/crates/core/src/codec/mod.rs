//! Animation export as a looping GIF89a or a numbered PNG sequence.

mod lzw;
mod quantize;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{write_png, RasterImage};

pub use quantize::{median_cut, nearest, quantize, Color, Quantized};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loop {
    #[default]
    Infinite,
    /// Number of repetitions written to the loop extension.
    Count(u16),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnimationJob {
    pub frames: Vec<RasterImage>,
    pub fps: f64,
    pub loop_mode: Loop,
    pub max_colors: usize,
    pub dither: bool,
}

impl AnimationJob {
    pub fn new(frames: Vec<RasterImage>, fps: f64) -> Self {
        AnimationJob {
            frames,
            fps,
            loop_mode: Loop::Infinite,
            max_colors: 256,
            dither: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.frames.first() else {
            return Err(Error::InvalidJob("no frames".into()));
        };
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::InvalidJob(format!("fps must be positive, got {}", self.fps)));
        }
        if !(2..=256).contains(&self.max_colors) {
            return Err(Error::InvalidJob(format!(
                "max_colors must be in 2..=256, got {}",
                self.max_colors
            )));
        }
        if first.width() > u16::MAX as usize || first.height() > u16::MAX as usize {
            return Err(Error::InvalidJob(format!(
                "{}x{} exceeds the GIF size limit",
                first.width(),
                first.height()
            )));
        }
        for (index, f) in self.frames.iter().enumerate() {
            if f.dims() != first.dims() {
                return Err(Error::FrameSizeMismatch {
                    index,
                    expected: first.dims(),
                    actual: f.dims(),
                });
            }
        }
        Ok(())
    }

    /// Per-frame delay in centiseconds, never below 2.
    pub fn delay_cs(&self) -> u16 {
        (100.0 / self.fps).round().clamp(2.0, u16::MAX as f64) as u16
    }
}

fn push_u16(out: &mut Vec<u8>, v: u16) {
    out.extend_from_slice(&v.to_le_bytes());
}

/// Bits per palette index (1..=8).
fn palette_bits(len: usize) -> u32 {
    let mut bits = 1;
    while (1usize << bits) < len {
        bits += 1;
    }
    bits
}

/// Encode an already quantized animation.
pub fn encode_quantized(q: &Quantized, delay_cs: u16, loop_mode: Loop) -> Result<Vec<u8>> {
    if q.palette.is_empty() || q.palette.len() > 256 {
        return Err(Error::TooManyColors(q.palette.len()));
    }
    let n = q.width * q.height;
    for (index, f) in q.frames.iter().enumerate() {
        if f.len() != n {
            return Err(Error::FrameSizeMismatch {
                index,
                expected: (q.width, q.height),
                actual: (f.len(), 1),
            });
        }
        if f.iter().any(|&k| k as usize >= q.palette.len()) {
            return Err(Error::TooManyColors(q.palette.len()));
        }
    }
    let bits = palette_bits(q.palette.len());
    let mut out = Vec::new();
    out.extend_from_slice(b"GIF89a");
    push_u16(&mut out, q.width as u16);
    push_u16(&mut out, q.height as u16);
    out.push(0x80 | (7 << 4) | (bits - 1) as u8);
    out.extend_from_slice(&[0, 0]);
    for i in 0..1usize << bits {
        out.extend_from_slice(q.palette.get(i).unwrap_or(&[0, 0, 0]));
    }

    out.extend_from_slice(&[0x21, 0xFF, 0x0B]);
    out.extend_from_slice(b"NETSCAPE2.0");
    out.extend_from_slice(&[0x03, 0x01]);
    push_u16(
        &mut out,
        match loop_mode {
            Loop::Infinite => 0,
            Loop::Count(c) => c,
        },
    );
    out.push(0);

    let min_code = bits.max(2);
    for f in &q.frames {
        // graphic control: disposal "leave in place", no transparency
        out.extend_from_slice(&[0x21, 0xF9, 0x04, 0x04]);
        push_u16(&mut out, delay_cs);
        out.extend_from_slice(&[0, 0]);

        out.push(0x2C);
        push_u16(&mut out, 0);
        push_u16(&mut out, 0);
        push_u16(&mut out, q.width as u16);
        push_u16(&mut out, q.height as u16);
        out.push(0);
        out.push(min_code as u8);
        out.extend(lzw::sub_blocks(&lzw::compress(f, min_code)));
    }
    out.push(0x3B);
    Ok(out)
}

/// Quantize and encode a job as an animated GIF.
pub fn encode_gif(job: &AnimationJob) -> Result<Vec<u8>> {
    job.validate()?;
    let q = quantize(&job.frames, job.max_colors, job.dither)?;
    encode_quantized(&q, job.delay_cs(), job.loop_mode)
}

/// Write `dir/stem_0000.png`, `dir/stem_0001.png`, ... and return the paths.
pub fn write_png_sequence(job: &AnimationJob, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    job.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    job.frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let path = dir.join(format!("{stem}_{i:04}.png"));
            write_png(f, &path)?;
            Ok(path)
        })
        .collect()
}
