//! Median-cut palette construction and index assignment.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::raster::{to_u8, RasterImage};

pub type Color = [u8; 3];

/// A shared palette and one index plane per frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quantized {
    pub width: usize,
    pub height: usize,
    pub palette: Vec<Color>,
    pub frames: Vec<Vec<u8>>,
}

impl Quantized {
    /// Palette colour of every pixel of frame `i`.
    pub fn colors(&self, i: usize) -> Vec<Color> {
        self.frames[i].iter().map(|&k| self.palette[k as usize]).collect()
    }
}

fn rgb8(img: &RasterImage) -> impl Iterator<Item = Color> + '_ {
    img.data().chunks_exact(4).map(|px| [to_u8(px[0]), to_u8(px[1]), to_u8(px[2])])
}

struct ColorBox {
    /// Distinct colours with their pixel counts, in a deterministic order.
    entries: Vec<(Color, u64)>,
}

impl ColorBox {
    fn range(&self, c: usize) -> u8 {
        let (lo, hi) = self
            .entries
            .iter()
            .fold((u8::MAX, u8::MIN), |(lo, hi), (col, _)| (lo.min(col[c]), hi.max(col[c])));
        hi - lo
    }

    /// Widest channel and its range; ties go to the lower channel index.
    fn widest(&self) -> (usize, u8) {
        (0..3).fold((0, 0), |best, c| {
            let r = self.range(c);
            if r > best.1 {
                (c, r)
            } else {
                best
            }
        })
    }

    fn split(mut self) -> (ColorBox, ColorBox) {
        let (c, _) = self.widest();
        self.entries.sort_by_key(|&(col, _)| (col[c], col));
        let total: u64 = self.entries.iter().map(|e| e.1).sum();
        let half = total / 2;
        let mut cum = 0;
        let mut at = self.entries.len();
        for (i, e) in self.entries.iter().enumerate() {
            cum += e.1;
            if cum >= half {
                at = i + 1;
                break;
            }
        }
        let at = at.clamp(1, self.entries.len() - 1);
        let right = self.entries.split_off(at);
        (self, ColorBox { entries: right })
    }

    fn mean(&self) -> Color {
        let total: u64 = self.entries.iter().map(|e| e.1).sum();
        let mut out = [0u8; 3];
        for (c, o) in out.iter_mut().enumerate() {
            let s: u64 = self.entries.iter().map(|(col, n)| col[c] as u64 * n).sum();
            *o = ((s + total / 2) / total) as u8;
        }
        out
    }
}

/// Median-cut palette of at most `max_colors` entries over all frames.
pub fn median_cut(frames: &[RasterImage], max_colors: usize) -> Vec<Color> {
    let mut hist: BTreeMap<Color, u64> = BTreeMap::new();
    for f in frames {
        for c in rgb8(f) {
            *hist.entry(c).or_default() += 1;
        }
    }
    let mut boxes = vec![ColorBox {
        entries: hist.into_iter().collect(),
    }];
    while boxes.len() < max_colors {
        // split the box with the largest channel range; earliest box wins ties
        let pick = boxes
            .iter()
            .enumerate()
            .filter(|(_, b)| b.entries.len() > 1)
            .fold(None, |best: Option<(usize, u8)>, (i, b)| {
                let r = b.widest().1;
                match best {
                    Some((_, br)) if br >= r => best,
                    _ => Some((i, r)),
                }
            });
        let Some((i, _)) = pick else { break };
        let (a, b) = boxes.remove(i).split();
        boxes.insert(i, b);
        boxes.insert(i, a);
    }
    boxes.iter().map(ColorBox::mean).collect()
}

fn dist2(a: [i32; 3], b: Color) -> i32 {
    (0..3).map(|c| (a[c] - b[c] as i32).pow(2)).sum()
}

/// Index of the nearest palette entry by squared distance; ties go to the lowest index.
pub fn nearest(palette: &[Color], c: [i32; 3]) -> u8 {
    let mut best = (0usize, i32::MAX);
    for (i, p) in palette.iter().enumerate() {
        let d = dist2(c, *p);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0 as u8
}

fn assign_plain(img: &RasterImage, palette: &[Color], cache: &mut HashMap<Color, u8>) -> Vec<u8> {
    rgb8(img)
        .map(|c| *cache.entry(c).or_insert_with(|| nearest(palette, c.map(i32::from))))
        .collect()
}

/// Floyd-Steinberg error diffusion with a serpentine scan.
fn assign_dithered(img: &RasterImage, palette: &[Color]) -> Vec<u8> {
    let (w, h) = img.dims();
    let mut work: Vec<[f32; 3]> = rgb8(img).map(|c| c.map(f32::from)).collect();
    let mut out = vec![0u8; w * h];
    for y in 0..h {
        let forward = y % 2 == 0;
        for step in 0..w {
            let x = if forward { step } else { w - 1 - step };
            let i = y * w + x;
            let want = work[i].map(|v| v.round().clamp(0.0, 255.0) as i32);
            let k = nearest(palette, want);
            out[i] = k;
            let got = palette[k as usize];
            let err: [f32; 3] = std::array::from_fn(|c| work[i][c] - got[c] as f32);
            let dir: isize = if forward { 1 } else { -1 };
            for (dx, dy, wgt) in [(dir, 0, 7.0), (-dir, 1, 3.0), (0, 1, 5.0), (dir, 1, 1.0)] {
                let nx = x as isize + dx;
                let ny = y + dy;
                if nx < 0 || nx >= w as isize || ny >= h {
                    continue;
                }
                let n = &mut work[ny * w + nx as usize];
                for c in 0..3 {
                    n[c] += err[c] * wgt / 16.0;
                }
            }
        }
    }
    out
}

/// Build a shared palette and map every frame onto it.
pub fn quantize(frames: &[RasterImage], max_colors: usize, dither: bool) -> Result<Quantized> {
    let first = frames.first().ok_or_else(|| Error::InvalidJob("no frames".into()))?;
    if !(2..=256).contains(&max_colors) {
        return Err(Error::InvalidJob(format!("max_colors must be in 2..=256, got {max_colors}")));
    }
    for (index, f) in frames.iter().enumerate() {
        if f.dims() != first.dims() {
            return Err(Error::FrameSizeMismatch {
                index,
                expected: first.dims(),
                actual: f.dims(),
            });
        }
    }
    let palette = median_cut(frames, max_colors);
    let mut cache = HashMap::new();
    let indexed = frames
        .iter()
        .map(|f| {
            if dither {
                assign_dithered(f, &palette)
            } else {
                assign_plain(f, &palette, &mut cache)
            }
        })
        .collect();
    Ok(Quantized {
        width: first.width(),
        height: first.height(),
        palette,
        frames: indexed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::from_u8;

    fn image(w: usize, h: usize, f: impl Fn(usize, usize) -> Color) -> RasterImage {
        RasterImage::from_fn(w, h, |x, y| {
            let c = f(x, y);
            [from_u8(c[0]), from_u8(c[1]), from_u8(c[2]), 1.0]
        })
        .unwrap()
    }

    #[test]
    fn solid_frame_single_entry() {
        let img = image(4, 3, |_, _| [10, 200, 30]);
        let q = quantize(&[img], 256, true).unwrap();
        assert_eq!(q.palette, vec![[10, 200, 30]]);
        assert!(q.frames[0].iter().all(|&i| i == 0));
    }

    #[test]
    fn two_colors_exact() {
        let img = image(5, 5, |x, y| if (x + y) % 2 == 0 { [255, 0, 0] } else { [0, 0, 255] });
        let q = quantize(&[img], 256, false).unwrap();
        assert_eq!(q.palette.len(), 2);
        let colors = q.colors(0);
        for y in 0..5 {
            for x in 0..5 {
                let want = if (x + y) % 2 == 0 { [255, 0, 0] } else { [0, 0, 255] };
                assert_eq!(colors[y * 5 + x], want);
            }
        }
    }

    #[test]
    fn chart_maps_to_nearest_entry() {
        let chart = image(16, 4, |x, _| [(x * 17) as u8, ((x * 53) % 256) as u8, (255 - x * 13) as u8]);
        let q = quantize(std::slice::from_ref(&chart), 8, false).unwrap();
        assert!(q.palette.len() <= 8);
        for (c, &k) in rgb8(&chart).zip(&q.frames[0]) {
            let d = dist2(c.map(i32::from), q.palette[k as usize]);
            assert!(q.palette.iter().all(|p| dist2(c.map(i32::from), *p) >= d));
        }
    }

    #[test]
    fn dithering_keeps_indices_in_palette() {
        let ramp = image(32, 8, |x, y| [(x * 8) as u8, (y * 32) as u8, 128]);
        let q = quantize(&[ramp], 4, true).unwrap();
        assert!(q.frames[0].iter().all(|&k| (k as usize) < q.palette.len()));
    }

    #[test]
    fn rejects_bad_jobs() {
        assert!(matches!(quantize(&[], 16, false), Err(Error::InvalidJob(_))));
        let a = image(2, 2, |_, _| [0, 0, 0]);
        let b = image(3, 2, |_, _| [0, 0, 0]);
        assert!(matches!(
            quantize(&[a, b], 16, false),
            Err(Error::FrameSizeMismatch { index: 1, .. })
        ));
    }
}
