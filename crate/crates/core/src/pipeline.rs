//! End-to-end orchestration: localize, inpaint, animate, enhance, fuse, encode.
//!
//! Intermediates that the CLI can write to disk (crop, coverage mask,
//! background) are rounded to 8 bits here as well, so running the stages one
//! at a time through files gives the same bytes as a single run.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{encode_gif, AnimationJob};
use crate::enhance::{upscale, EnhanceParams};
use crate::error::{Error, Result};
use crate::fusion::{fuse_frame, FusionParams};
use crate::inpaint::{pure_background, InpaintParams};
use crate::localization::{localize, LocalizedObject, MattingParams};
use crate::motion::{animate, auto_keypoints, AnimatedFrame, DrivingSequence, MotionFrame, MotionParams};
use crate::raster::{PixelRect, RasterImage, Rgb};
use crate::seed::{derive_seed, INPAINT_TAG};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    #[default]
    Gif,
    PngSequence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub matting: MattingParams,
    pub inpaint: InpaintParams,
    pub motion: MotionParams,
    pub enhance: EnhanceParams,
    pub fusion: FusionParams,
    pub output: OutputKind,
    pub max_colors: usize,
    pub dither: bool,
    /// Crops are enhanced by the smallest integer factor reaching this side.
    pub target_crop_side: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            matting: MattingParams::default(),
            inpaint: InpaintParams::default(),
            motion: MotionParams::default(),
            enhance: EnhanceParams::default(),
            fusion: FusionParams::default(),
            output: OutputKind::Gif,
            max_colors: 256,
            dither: true,
            target_crop_side: 512,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.matting.validate()?;
        self.inpaint.validate()?;
        self.motion.validate()?;
        self.enhance.validate()?;
        self.fusion.validate()?;
        if !(2..=256).contains(&self.max_colors) {
            return Err(Error::params(format!("max_colors must be in 2..=256, got {}", self.max_colors)));
        }
        if self.target_crop_side < 1 {
            return Err(Error::params("target_crop_side must be >= 1"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "config".into(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json { source, .. } => Error::Json {
                context: format!("config {}", path.display()),
                source,
            },
            e => e,
        })
    }

    /// Inpainting parameters with the stage seed derived from `seed`.
    pub fn inpaint_params(&self) -> InpaintParams {
        InpaintParams {
            seed: derive_seed(self.seed, INPAINT_TAG),
            ..self.inpaint
        }
    }

    /// Enhancement parameters with the factor chosen for a crop of side `crop_side`.
    pub fn enhance_params(&self, crop_side: usize) -> EnhanceParams {
        EnhanceParams {
            factor: self.target_crop_side.div_ceil(crop_side.max(1)).max(1),
            ..self.enhance
        }
    }
}

/// Wall-clock seconds spent per stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub localize: f64,
    pub inpaint: f64,
    pub animate: f64,
    pub enhance: f64,
    pub fuse: f64,
    pub encode: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub source_rect: PixelRect,
    pub background_color: Rgb,
    pub num_keypoints: usize,
    pub frame_count: usize,
    pub enhance_factor: usize,
    pub timings: StageTimings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Animation {
    Gif(Vec<u8>),
    Frames(Vec<RasterImage>),
}

/// Localization with 8-bit crop and coverage, matching what the matte files hold.
pub fn matte_stage(raw: &RasterImage, cfg: &PipelineConfig) -> Result<LocalizedObject> {
    let mut loc = localize(raw, &cfg.matting).map_err(|e| e.in_stage("localize"))?;
    loc.crop = loc.crop.quantized_8bit();
    loc.crop_mask = loc.crop_mask.quantized_8bit();
    Ok(loc)
}

/// Inpainted background, rounded to 8 bits.
pub fn inpaint_stage(raw: &RasterImage, loc: &LocalizedObject, cfg: &PipelineConfig) -> Result<RasterImage> {
    pure_background(raw, loc, &cfg.inpaint_params())
        .map(|bg| bg.quantized_8bit())
        .map_err(|e| e.in_stage("inpaint"))
}

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

/// Source keypoints: the given file's, or farthest-point samples of the coverage mask.
pub fn source_keypoints(loc: &LocalizedObject, seq: &DrivingSequence, given: Option<&MotionFrame>) -> Result<MotionFrame> {
    let kp = match given {
        Some(kp) => kp.clone(),
        None => auto_keypoints(&loc.crop_mask, seq.num_keypoints).map_err(|e| e.in_stage("keypoints"))?,
    };
    if kp.len() != seq.num_keypoints {
        return Err(Error::KeypointCountMismatch {
            expected: seq.num_keypoints,
            actual: kp.len(),
        }
        .in_stage("keypoints"));
    }
    Ok(kp)
}

/// Everything after localization and inpainting.
pub fn animate_stage(
    raw: &RasterImage,
    loc: &LocalizedObject,
    background: &RasterImage,
    seq: &DrivingSequence,
    cfg: &PipelineConfig,
    given_keypoints: Option<&MotionFrame>,
    timings: StageTimings,
) -> Result<(Animation, RunReport)> {
    cfg.validate()?;
    let mut timings = timings;
    let src_kp = source_keypoints(loc, seq, given_keypoints)?;

    let t = Instant::now();
    let frames = animate(&loc.crop, &loc.crop_mask, &src_kp, seq, &cfg.motion).map_err(|e| e.in_stage("animate"))?;
    timings.animate = secs(t);

    let t = Instant::now();
    let ep = cfg.enhance_params(loc.crop.width());
    let enhanced: Vec<AnimatedFrame> = frames
        .into_par_iter()
        .map(|f| {
            // carry the coverage in the alpha channel so it takes the alpha path
            let up = upscale(&f.image.with_channel(3, &f.mask)?, &ep)?;
            let mask = up.channel(3);
            Ok(AnimatedFrame { image: up, mask })
        })
        .collect::<Result<_>>()
        .map_err(|e: Error| e.in_stage("enhance"))?;
    timings.enhance = secs(t);

    let t = Instant::now();
    let fused: Vec<RasterImage> = enhanced
        .par_iter()
        .map(|f| fuse_frame(raw, loc, background, &f.image, &f.mask, &cfg.fusion))
        .collect::<Result<_>>()
        .map_err(|e| e.in_stage("fuse"))?;
    timings.fuse = secs(t);

    let t = Instant::now();
    let animation = match cfg.output {
        OutputKind::Gif => {
            let job = AnimationJob {
                max_colors: cfg.max_colors,
                dither: cfg.dither,
                ..AnimationJob::new(fused, seq.fps)
            };
            Animation::Gif(encode_gif(&job).map_err(|e| e.in_stage("encode"))?)
        }
        OutputKind::PngSequence => Animation::Frames(fused.iter().map(RasterImage::quantized_8bit).collect()),
    };
    timings.encode = secs(t);

    let report = RunReport {
        source_rect: loc.source_rect,
        background_color: loc.background,
        num_keypoints: src_kp.len(),
        frame_count: seq.frames.len(),
        enhance_factor: ep.factor,
        timings,
        output: None,
    };
    Ok((animation, report))
}

/// Run every stage on one image and driving sequence.
pub fn run_pipeline(
    raw: &RasterImage,
    seq: &DrivingSequence,
    cfg: &PipelineConfig,
    given_keypoints: Option<&MotionFrame>,
) -> Result<(Animation, RunReport)> {
    cfg.validate()?;
    seq.validate()?;
    let mut timings = StageTimings::default();
    let t = Instant::now();
    let loc = matte_stage(raw, cfg)?;
    timings.localize = secs(t);
    let t = Instant::now();
    let background = inpaint_stage(raw, &loc, cfg)?;
    timings.inpaint = secs(t);
    animate_stage(raw, &loc, &background, seq, cfg, given_keypoints, timings)
}
