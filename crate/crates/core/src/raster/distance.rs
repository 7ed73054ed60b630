use crate::error::Result;
use crate::raster::AlphaMask;

/// Per-pixel Euclidean distances in pixels. Pixels with no zero-valued pixel
/// anywhere in the mask hold `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl DistanceField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }
}

/// Exact Euclidean distance from every pixel to the nearest pixel whose mask
/// value is 0.
///
/// Two separable passes of the lower-envelope-of-parabolas squared distance
/// transform. All intermediate values are integers, so the squared distances
/// are exact and the final square root matches a brute-force search bit for bit.
pub fn distance_transform(mask: &AlphaMask) -> Result<DistanceField> {
    mask.require_binary()?;
    let (w, h) = mask.dims();
    let mut sq: Vec<f64> = mask
        .data()
        .iter()
        .map(|&v| if v == 0.0 { 0.0 } else { f64::INFINITY })
        .collect();

    let n = w.max(h);
    let mut scratch = Envelope::with_capacity(n);
    let mut line = vec![0.0; n];
    let mut out = vec![0.0; n];

    for x in 0..w {
        for y in 0..h {
            line[y] = sq[y * w + x];
        }
        scratch.transform(&line[..h], &mut out[..h]);
        for y in 0..h {
            sq[y * w + x] = out[y];
        }
    }
    for y in 0..h {
        line[..w].copy_from_slice(&sq[y * w..(y + 1) * w]);
        scratch.transform(&line[..w], &mut out[..w]);
        sq[y * w..(y + 1) * w].copy_from_slice(&out[..w]);
    }

    Ok(DistanceField {
        width: w,
        height: h,
        data: sq.into_iter().map(f64::sqrt).collect(),
    })
}

struct Envelope {
    vertices: Vec<usize>,
    bounds: Vec<f64>,
}

impl Envelope {
    fn with_capacity(n: usize) -> Self {
        Envelope {
            vertices: Vec::with_capacity(n),
            bounds: Vec::with_capacity(n + 1),
        }
    }

    /// 1-D squared distance transform of the sampled function `f`.
    /// Infinite samples contribute no parabola.
    fn transform(&mut self, f: &[f64], out: &mut [f64]) {
        self.vertices.clear();
        self.bounds.clear();
        for (q, &fq) in f.iter().enumerate() {
            if !fq.is_finite() {
                continue;
            }
            loop {
                let Some(&v) = self.vertices.last() else {
                    self.vertices.push(q);
                    self.bounds.push(f64::NEG_INFINITY);
                    break;
                };
                let s = intersect(f, v, q);
                if s <= *self.bounds.last().unwrap() {
                    self.vertices.pop();
                    self.bounds.pop();
                } else {
                    self.vertices.push(q);
                    self.bounds.push(s);
                    break;
                }
            }
        }
        if self.vertices.is_empty() {
            out.fill(f64::INFINITY);
            return;
        }
        let mut k = 0;
        for (p, o) in out.iter_mut().enumerate() {
            let pf = p as f64;
            while k + 1 < self.vertices.len() && self.bounds[k + 1] < pf {
                k += 1;
            }
            let v = self.vertices[k];
            let d = p as f64 - v as f64;
            *o = f[v] + d * d;
        }
    }
}

fn intersect(f: &[f64], v: usize, q: usize) -> f64 {
    let (vf, qf) = (v as f64, q as f64);
    ((f[q] + qf * qf) - (f[v] + vf * vf)) / (2.0 * (qf - vf))
}
