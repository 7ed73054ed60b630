//! GIF output decoded by an independent decoder.

mod common;

use common::{fixtures, gif_oracle};
use gif::Repeat;
use movelike::codec::{encode_gif, quantize, write_png_sequence, AnimationJob, Loop};
use movelike::raster::{read_png, to_u8};
use movelike::{Error, RasterImage};

fn rgb8(img: &RasterImage) -> Vec<[u8; 3]> {
    img.data().chunks_exact(4).map(|p| [to_u8(p[0]), to_u8(p[1]), to_u8(p[2])]).collect()
}

#[test]
fn suite_round_trips() {
    for case in fixtures::codec_suite() {
        let job = &case.job;
        let bytes = encode_gif(job).unwrap();
        let decoded = gif_oracle::decode(&bytes);
        let q = quantize(&job.frames, job.max_colors, job.dither).unwrap();
        assert_eq!((decoded.width, decoded.height), job.frames[0].dims(), "{}", case.name);
        assert_eq!(decoded.frames.len(), job.frames.len(), "{}", case.name);
        let want_repeat = match job.loop_mode {
            Loop::Infinite => Repeat::Infinite,
            Loop::Count(n) => Repeat::Finite(n),
        };
        assert_eq!(decoded.repeat, want_repeat, "{}", case.name);
        assert!(decoded.delays.iter().all(|&d| d == job.delay_cs()));
        for (i, frame) in decoded.frames.iter().enumerate() {
            assert_eq!(frame, &q.colors(i), "{} frame {i}", case.name);
            if case.lossless {
                assert_eq!(frame, &rgb8(&job.frames[i]), "{} frame {i}", case.name);
            }
        }
    }
}

#[test]
fn lzw_width_boundaries() {
    // sizes around the points where the code width grows and the table resets
    for (w, h, colors) in [(1, 1, 2), (2, 1, 3), (5, 3, 4), (40, 40, 5), (64, 64, 16), (300, 200, 200)] {
        let img = RasterImage::from_fn(w, h, |x, y| {
            let k = ((x * 31 + y * 17 + x * y) % colors) as f32 / colors as f32;
            [k, 1.0 - k, (k * 3.0).fract(), 1.0]
        })
        .unwrap();
        let job = AnimationJob {
            dither: false,
            ..AnimationJob::new(vec![img.clone()], 10.0)
        };
        let decoded = gif_oracle::decode(&encode_gif(&job).unwrap());
        assert_eq!(decoded.frames[0], rgb8(&img), "{w}x{h} with {colors} colours");
    }
}

#[test]
fn png_sequence_is_lossless() {
    let frames: Vec<RasterImage> = (0..3)
        .map(|t| RasterImage::from_fn(5, 4, |x, y| [x as f32 / 4.0, y as f32 / 3.0, t as f32 / 2.0, 1.0]).unwrap())
        .collect();
    let job = AnimationJob::new(frames.iter().map(RasterImage::quantized_8bit).collect(), 10.0);
    let dir = tempfile::tempdir().unwrap();
    let paths = write_png_sequence(&job, dir.path(), "clip").unwrap();
    let names: Vec<String> = paths.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["clip_0000.png", "clip_0001.png", "clip_0002.png"]);
    for (p, f) in paths.iter().zip(&job.frames) {
        assert_eq!(&read_png(p).unwrap(), f);
    }
    let empty = AnimationJob::new(vec![], 10.0);
    assert!(matches!(write_png_sequence(&empty, dir.path(), "x"), Err(Error::InvalidJob(_))));
}
