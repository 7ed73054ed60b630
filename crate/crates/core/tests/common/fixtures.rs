//! Deterministic inputs shared by the integration and acceptance tests.

use movelike::codec::{AnimationJob, Loop};
use movelike::raster::from_u8;
use movelike::RasterImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rgb8_image(w: usize, h: usize, f: impl Fn(usize, usize) -> [u8; 3]) -> RasterImage {
    RasterImage::from_fn(w, h, |x, y| {
        let c = f(x, y);
        [from_u8(c[0]), from_u8(c[1]), from_u8(c[2]), 1.0]
    })
    .unwrap()
}

/// A named job plus whether its GIF round trip must reproduce the input exactly.
pub struct CodecCase {
    pub name: &'static str,
    pub job: AnimationJob,
    pub lossless: bool,
}

/// Five jobs covering solid colour, few colours, palette reduction, a full
/// 256-entry palette with LZW table resets, and dithering.
pub fn codec_suite() -> Vec<CodecCase> {
    let solid = AnimationJob {
        dither: false,
        ..AnimationJob::new(vec![rgb8_image(1, 1, |_, _| [12, 34, 56])], 10.0)
    };

    let checker = |phase: usize| rgb8_image(17, 13, move |x, y| if (x + y + phase).is_multiple_of(2) { [255, 255, 255] } else { [200, 16, 40] });
    let two = AnimationJob {
        loop_mode: Loop::Count(3),
        dither: false,
        ..AnimationJob::new((0..3).map(checker).collect(), 12.5)
    };

    let chart = AnimationJob {
        max_colors: 8,
        dither: false,
        ..AnimationJob::new(
            vec![rgb8_image(32, 8, |x, _| {
                let k = x / 2;
                [(k * 17) as u8, ((k * 53) % 256) as u8, (255 - k * 13) as u8]
            })],
            24.0,
        )
    };

    let mut rng = ChaCha8Rng::seed_from_u64(256);
    let palette: Vec<[u8; 3]> = (0..256).map(|i| [i as u8, (i * 7 % 256) as u8, 255 - i as u8]).collect();
    let noise: Vec<RasterImage> = (0..2)
        .map(|_| {
            let idx: Vec<usize> = (0..128 * 96).map(|_| rng.gen_range(0..256)).collect();
            rgb8_image(128, 96, |x, y| palette[idx[y * 128 + x]])
        })
        .collect();
    let full = AnimationJob {
        dither: false,
        ..AnimationJob::new(noise, 8.0)
    };

    let ramps = AnimationJob {
        max_colors: 32,
        ..AnimationJob::new(
            (0..4)
                .map(|t| rgb8_image(64, 48, move |x, y| [(x * 4) as u8, (y * 5) as u8, (t * 60) as u8]))
                .collect(),
            15.0,
        )
    };

    vec![
        CodecCase { name: "solid 1x1", job: solid, lossless: true },
        CodecCase { name: "two-colour checker", job: two, lossless: true },
        CodecCase { name: "16-colour chart to 8", job: chart, lossless: false },
        CodecCase { name: "256-colour noise", job: full, lossless: true },
        CodecCase { name: "dithered ramps", job: ramps, lossless: false },
    ]
}

/// 256x256 product shot: a patterned object on a softly lit, slightly noisy
/// backdrop.
pub fn product_scene(seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f32> = (0..256 * 256).map(|_| rng.gen_range(-0.01..0.01)).collect();
    RasterImage::from_fn(256, 256, |x, y| {
        let (fx, fy) = (x as f32, y as f32);
        let body = ((fx - 128.0) / 58.0).powi(2) + ((fy - 150.0) / 72.0).powi(2) <= 1.0;
        let head = (fx - 128.0).powi(2) + (fy - 70.0).powi(2) <= 30.0f32.powi(2);
        if body {
            let band = ((fy - 78.0) / 12.0).floor() as i32 % 3;
            match band {
                0 => [0.80, 0.20, 0.15, 1.0],
                1 => [0.95, 0.75, 0.10, 1.0],
                _ => [0.20, 0.35, 0.70, 1.0],
            }
        } else if head {
            [0.55 + 0.002 * (fx - 128.0), 0.40, 0.25, 1.0]
        } else {
            let g = 0.93 + 0.03 * fy / 255.0 + noise[y * 256 + x];
            [g, g, g - 0.01, 1.0]
        }
    })
    .unwrap()
    .quantized_8bit()
}

/// 128x128 white image with a 40x40 coloured square in the middle.
pub fn toy_scene() -> RasterImage {
    RasterImage::from_fn(128, 128, |x, y| {
        if (44..84).contains(&x) && (44..84).contains(&y) {
            let checker = ((x / 8 + y / 8) % 2) as f32;
            [0.85 - 0.3 * checker, 0.25, 0.2 + 0.4 * checker, 1.0]
        } else {
            [1.0, 1.0, 1.0, 1.0]
        }
    })
    .unwrap()
    .quantized_8bit()
}

/// Horizontal sway of a single keypoint: offsets `amplitude * sin(2 pi t / n)`
/// in normalized units, relative mode.
pub fn sway_sequence(amplitude: f64, n: usize) -> movelike::motion::DrivingSequence {
    use movelike::motion::{DrivingSequence, Keypoint, MotionFrame, MotionMode};
    let frames = (0..n)
        .map(|t| {
            let dx = amplitude * (std::f64::consts::TAU * t as f64 / n as f64).sin();
            MotionFrame {
                keypoints: vec![Keypoint::at(dx, 0.0)],
            }
        })
        .collect();
    DrivingSequence::new(12.5, MotionMode::Relative, frames).unwrap()
}

/// Coverage-weighted centroid in pixels.
pub fn mask_centroid(mask: &movelike::AlphaMask) -> (f64, f64) {
    let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            let v = mask.get(x, y) as f64;
            sx += v * x as f64;
            sy += v * y as f64;
            sw += v;
        }
    }
    (sx / sw, sy / sw)
}

/// Centroid of pixels whose colour differs from white by more than `threshold` in some channel.
pub fn non_white_centroid(pixels: &[[u8; 3]], width: usize, threshold: u8) -> (f64, f64) {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
    for (i, p) in pixels.iter().enumerate() {
        if p.iter().any(|&c| 255 - c > threshold) {
            sx += (i % width) as f64;
            sy += (i / width) as f64;
            n += 1.0;
        }
    }
    (sx / n, sy / n)
}
