//! Command-line front end. Reports go to stdout as JSON, diagnostics to stderr.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::codec::{write_png_sequence, AnimationJob};
use crate::enhance::{upscale, EnhanceParams};
use crate::error::{Error, ErrorKind, Result};
use crate::inpaint::inpaint;
use crate::localization::LocalizedObject;
use crate::motion::{dense_motion, frame_transforms, render_field, warp, DrivingSequence, MotionFrame, WARP_FILL};
use crate::pipeline::{animate_stage, matte_stage, run_pipeline, source_keypoints, Animation, PipelineConfig, StageTimings};
use crate::raster::{read_mask_png, read_png, write_mask_png, write_png, PixelRect, Rgb};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_PROCESSING: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub fn exit_code(kind: ErrorKind) -> i32 {
    match kind {
        ErrorKind::InvalidInput => EXIT_INVALID,
        ErrorKind::Processing => EXIT_PROCESSING,
        ErrorKind::Io => EXIT_IO,
    }
}

#[derive(Debug, Parser)]
#[command(name = "movelike", version, about = "Animate the object in a product photo from a keypoint driving sequence")]
pub struct Cli {
    /// Worker threads; output bytes do not depend on it.
    #[arg(long, global = true, env = "MOVELIKE_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Locate the object: writes crop.png, crop_mask.png, hole_mask.png and matte.json.
    Matte {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Fill the masked region of an image.
    Inpaint {
        #[arg(long)]
        input: PathBuf,
        /// Binary PNG mask; white marks pixels to fill.
        #[arg(long)]
        hole: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Upscale an image by an integer factor.
    Enhance {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        factor: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Render the dense motion field of one driving frame as a colour-coded PNG.
    PreviewMotion {
        #[arg(long)]
        matte: PathBuf,
        #[arg(long)]
        driving: PathBuf,
        #[arg(long, default_value_t = 0)]
        frame: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also write the warped crop for this frame.
        #[arg(long)]
        warped: Option<PathBuf>,
        #[arg(long)]
        source_keypoints: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the full pipeline, or its tail when --matte and --background are given.
    Animate(AnimateArgs),
}

#[derive(Debug, Args)]
pub struct AnimateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub driving: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// GIF file, or a directory for PNG-sequence output.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, requires = "background")]
    pub matte: Option<PathBuf>,
    #[arg(long, requires = "matte")]
    pub background: Option<PathBuf>,
    #[arg(long)]
    pub source_keypoints: Option<PathBuf>,
}

/// `matte.json`: the localization result next to its PNG files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatteSidecar {
    pub source_rect: PixelRect,
    pub background_color: Rgb,
    pub crop: PathBuf,
    pub crop_mask: PathBuf,
    pub hole_mask: PathBuf,
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        Some(p) => PipelineConfig::load(p),
        None => Ok(PipelineConfig::default()),
    }
}

fn load_sequence(path: &Path) -> Result<DrivingSequence> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    DrivingSequence::from_json(&text).map_err(|e| tag_path(e, path))
}

fn load_keypoints(path: Option<&Path>) -> Result<Option<MotionFrame>> {
    path.map(|p| {
        let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
        MotionFrame::from_json(&text).map_err(|e| tag_path(e, p))
    })
    .transpose()
}

fn tag_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Json { source, context } => Error::Json {
            context: format!("{context} {}", path.display()),
            source,
        },
        Error::InvalidSequence(m) => Error::InvalidSequence(format!("{}: {m}", path.display())),
        e => e,
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn print_report(value: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn write_matte(loc: &LocalizedObject, dir: &Path) -> Result<MatteSidecar> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let side = MatteSidecar {
        source_rect: loc.source_rect,
        background_color: loc.background,
        crop: "crop.png".into(),
        crop_mask: "crop_mask.png".into(),
        hole_mask: "hole_mask.png".into(),
    };
    write_png(&loc.crop, dir.join(&side.crop))?;
    write_mask_png(&loc.crop_mask, dir.join(&side.crop_mask))?;
    write_mask_png(&loc.hole_mask, dir.join(&side.hole_mask))?;
    write_json(&dir.join("matte.json"), &side)?;
    Ok(side)
}

/// Read a matte sidecar; its file names are relative to the sidecar's directory.
pub fn read_matte(path: &Path) -> Result<LocalizedObject> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let side: MatteSidecar = serde_json::from_str(&text).map_err(|source| Error::Json {
        context: format!("matte file {}", path.display()),
        source,
    })?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let crop = read_png(dir.join(&side.crop))?;
    let crop_mask = read_mask_png(dir.join(&side.crop_mask))?;
    let hole_mask = read_mask_png(dir.join(&side.hole_mask))?;
    if crop.dims() != (side.source_rect.w, side.source_rect.h) || crop_mask.dims() != crop.dims() {
        return Err(Error::SizeMismatch {
            expected: (side.source_rect.w, side.source_rect.h),
            actual: crop.dims(),
        });
    }
    Ok(LocalizedObject {
        crop,
        crop_mask,
        source_rect: side.source_rect,
        hole_mask,
        background: side.background_color,
    })
}

fn run_animate(args: &AnimateArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref())?;
    let seq = load_sequence(&args.driving)?;
    let kp = load_keypoints(args.source_keypoints.as_deref())?;
    let raw = read_png(&args.input)?;
    let (animation, mut report) = match (&args.matte, &args.background) {
        (Some(m), Some(b)) => {
            let loc = read_matte(m)?;
            let bg = read_png(b)?;
            animate_stage(&raw, &loc, &bg, &seq, &cfg, kp.as_ref(), StageTimings::default())?
        }
        _ => run_pipeline(&raw, &seq, &cfg, kp.as_ref())?,
    };
    match animation {
        Animation::Gif(bytes) => {
            std::fs::write(&args.out, bytes).map_err(|e| Error::io(&args.out, e))?;
        }
        Animation::Frames(frames) => {
            write_png_sequence(&AnimationJob::new(frames, seq.fps), &args.out, "frame")?;
        }
    }
    report.output = Some(args.out.clone());
    print_report(&report);
    Ok(())
}

fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Matte { input, out_dir, config } => {
            let cfg = load_config(config.as_deref())?;
            let raw = read_png(input)?;
            let loc = matte_stage(&raw, &cfg)?;
            print_report(&write_matte(&loc, out_dir)?);
        }
        Command::Inpaint {
            input,
            hole,
            out,
            config,
        } => {
            let cfg = load_config(config.as_deref())?;
            let raw = read_png(input)?;
            let hole = read_mask_png(hole)?;
            let filled = inpaint(&raw, &hole, &cfg.inpaint_params())?;
            write_png(&filled, out)?;
            print_report(&serde_json::json!({ "output": out, "width": filled.width(), "height": filled.height() }));
        }
        Command::Enhance {
            input,
            out,
            factor,
            config,
        } => {
            let cfg = load_config(config.as_deref())?;
            let p = EnhanceParams {
                factor: factor.unwrap_or(cfg.enhance.factor),
                ..cfg.enhance
            };
            let img = read_png(input)?;
            let up = upscale(&img, &p)?;
            write_png(&up, out)?;
            print_report(&serde_json::json!({ "output": out, "factor": p.factor, "width": up.width(), "height": up.height() }));
        }
        Command::PreviewMotion {
            matte,
            driving,
            frame,
            out,
            warped,
            source_keypoints: kp_path,
            config,
        } => {
            let cfg = load_config(config.as_deref())?;
            let seq = load_sequence(driving)?;
            let loc = read_matte(matte)?;
            let kp = load_keypoints(kp_path.as_deref())?;
            let src = source_keypoints(&loc, &seq, kp.as_ref())?;
            let drv = seq.frames.get(*frame).ok_or_else(|| {
                Error::InvalidSequence(format!("frame {frame} out of range (sequence has {})", seq.frames.len()))
            })?;
            let ts = frame_transforms(&src, drv, &seq.frames[0], seq.mode)?;
            let field = dense_motion(&ts, drv, &cfg.motion, loc.crop.width(), loc.crop.height())?;
            let anchors: Vec<_> = ts.iter().map(|t| t.anchor).collect();
            write_png(&render_field(&field, &anchors), out)?;
            if let Some(w) = warped {
                write_png(&warp(&loc.crop, &field, WARP_FILL)?, w)?;
            }
            print_report(&serde_json::json!({ "output": out, "frame": frame, "num_keypoints": src.len() }));
        }
        Command::Animate(args) => run_animate(args)?,
    }
    Ok(())
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return EXIT_INVALID;
        }
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return EXIT_PROCESSING;
        }
    };
    match pool.install(|| execute(&cli.command)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(e.kind())
        }
    }
}
