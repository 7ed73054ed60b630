//! PatchMatch checked against exhaustive nearest-neighbour search on small images.

mod common;

use common::oracle;
use movelike::inpaint::{inpaint_with_field, InpaintParams};
use movelike::{AlphaMask, RasterImage};

fn central_hole(w: usize, h: usize, side: usize) -> AlphaMask {
    let (x0, y0) = ((w - side) / 2, (h - side) / 2);
    AlphaMask::from_fn(w, h, |x, y| {
        ((x0..x0 + side).contains(&x) && (y0..y0 + side).contains(&y)) as u8 as f32
    })
    .unwrap()
}

#[test]
fn vertical_stripes_match_exhaustive_oracle() {
    let palette = [[0.1, 0.2, 0.7], [0.9, 0.8, 0.1], [0.3, 0.9, 0.4], [0.95, 0.95, 0.95]];
    let img = RasterImage::from_fn(32, 32, |x, _| {
        let c = palette[x % 4];
        [c[0], c[1], c[2], 1.0]
    })
    .unwrap();
    let hole = central_hole(32, 32, 8);
    let p = InpaintParams {
        seed: 1,
        ..Default::default()
    };
    let (out, nnf) = inpaint_with_field(&img, &hole, &p).unwrap();
    let exhaustive = oracle::exhaustive_nnf(&img, &hole, p.patch_size);
    let reference = oracle::vote(&img, &hole, &exhaustive, p.patch_size);

    let mae = oracle::hole_mae(&out, &reference, &hole);
    assert!(mae <= 0.05, "mean abs error vs oracle = {mae}");
    let optimum: f64 = exhaustive.iter().map(|m| m.cost).sum();
    let mine = oracle::total_cost(&img, &hole, &nnf, p.patch_size);
    assert!(mine <= 1.5 * optimum + 1e-9, "cost {mine} vs optimum {optimum}");
    // the stripes continue through the hole
    assert!(oracle::hole_mae(&out, &img, &hole) <= 0.05);
}

#[test]
fn random_textures_stay_within_cost_bound() {
    for seed in 0..20u64 {
        let img = oracle::texture(32, 32, seed);
        let hole = oracle::random_hole(32, 32, seed);
        let p = InpaintParams {
            seed,
            ..Default::default()
        };
        let (out, nnf) = inpaint_with_field(&img, &hole, &p).unwrap();
        let optimum: f64 = oracle::exhaustive_nnf(&img, &hole, p.patch_size).iter().map(|m| m.cost).sum();
        let mine = oracle::total_cost(&img, &hole, &nnf, p.patch_size);
        assert!(mine <= 1.5 * optimum + 1e-9, "seed {seed}: cost {mine} vs optimum {optimum}");
        oracle::assert_identity_outside(&img, &out, &hole);
        oracle::assert_within_known_range(&img, &out, &hole);
    }
}
