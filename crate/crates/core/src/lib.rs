//! Deterministic product-photo animation.
//!
//! A single product photograph and a driving keypoint sequence go in; an
//! animation comes out. The stages run in this order:
//!
//! 1. [`localization`] estimates the backdrop, mattes the dominant object and
//!    cuts a square crop of it on white.
//! 2. [`inpaint`] fills the hole left by the object with seeded PatchMatch.
//! 3. [`motion`] warps the crop frame by frame with a first-order (local
//!    affine) keypoint motion model.
//! 4. [`enhance`] upscales each frame with Lanczos + iterative back-projection.
//! 5. [`fusion`] composites frames over the clean background and stitches the
//!    crop back into the photo with soft seams.
//! 6. [`codec`] writes a looping GIF or a PNG sequence.
//!
//! [`pipeline`] wires everything together; [`cli`] exposes it as a command line tool.

pub mod cli;
pub mod codec;
pub mod enhance;
pub mod error;
pub mod fusion;
pub mod inpaint;
pub mod localization;
pub mod motion;
pub mod pipeline;
pub mod raster;
pub(crate) mod seed;

pub use error::{Error, ErrorKind, Result};
pub use raster::{AlphaMask, PixelRect, RasterImage, Rgb, Rgba};
