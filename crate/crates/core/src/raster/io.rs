//! 8-bit PNG I/O. Samples map as `v -> round(255 v)` on write and `b -> b / 255`
//! on read.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{from_u8, AlphaMask, RasterImage};

struct Decoded {
    width: usize,
    height: usize,
    color: png::ColorType,
    pixels: Vec<u8>,
}

fn decode(bytes: &[u8]) -> std::result::Result<Decoded, String> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::normalize_to_color8());
    let mut reader = decoder.read_info().map_err(|e| e.to_string())?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| "image too large".to_string())?;
    let mut pixels = vec![0; size];
    let info = reader.next_frame(&mut pixels).map_err(|e| e.to_string())?;
    pixels.truncate(info.buffer_size());
    Ok(Decoded {
        width: info.width as usize,
        height: info.height as usize,
        color: info.color_type,
        pixels,
    })
}

fn encode(width: usize, height: usize, color: png::ColorType, pixels: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width as u32, height as u32);
        enc.set_color(color);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().map_err(|e| Error::PngEncode(e.to_string()))?;
        writer
            .write_image_data(pixels)
            .map_err(|e| Error::PngEncode(e.to_string()))?;
        writer.finish().map_err(|e| Error::PngEncode(e.to_string()))?;
    }
    Ok(out)
}

/// Decode PNG bytes into an RGBA image. Grey and RGB inputs get an opaque alpha.
pub fn decode_png(bytes: &[u8], origin: &Path) -> Result<RasterImage> {
    let d = decode(bytes).map_err(|message| Error::PngDecode {
        path: origin.to_path_buf(),
        message,
    })?;
    let rgba: Vec<u8> = match d.color {
        png::ColorType::Rgba => d.pixels,
        png::ColorType::Rgb => d.pixels.chunks_exact(3).flat_map(|p| [p[0], p[1], p[2], 255]).collect(),
        png::ColorType::Grayscale => d.pixels.iter().flat_map(|&g| [g, g, g, 255]).collect(),
        png::ColorType::GrayscaleAlpha => d.pixels.chunks_exact(2).flat_map(|p| [p[0], p[0], p[0], p[1]]).collect(),
        png::ColorType::Indexed => {
            return Err(Error::PngDecode {
                path: origin.to_path_buf(),
                message: "palette was not expanded".into(),
            })
        }
    };
    RasterImage::from_rgba8(d.width, d.height, &rgba)
}

pub fn encode_png(img: &RasterImage) -> Result<Vec<u8>> {
    encode(img.width(), img.height(), png::ColorType::Rgba, &img.to_rgba8())
}

pub fn encode_mask_png(mask: &AlphaMask) -> Result<Vec<u8>> {
    encode(mask.width(), mask.height(), png::ColorType::Grayscale, &mask.to_u8())
}

/// Decode a mask PNG. Colour inputs use their first channel.
pub fn decode_mask_png(bytes: &[u8], origin: &Path) -> Result<AlphaMask> {
    let d = decode(bytes).map_err(|message| Error::PngDecode {
        path: origin.to_path_buf(),
        message,
    })?;
    let stride = match d.color {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Indexed => 1,
    };
    let data = d.pixels.iter().step_by(stride).map(|&b| from_u8(b)).collect();
    AlphaMask::from_vec(d.width, d.height, data)
}

pub fn read_png(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_png(&bytes, path)
}

pub fn write_png(img: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_png(img)?).map_err(|e| Error::io(path, e))
}

pub fn read_mask_png(path: impl AsRef<Path>) -> Result<AlphaMask> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_mask_png(&bytes, path)
}

pub fn write_mask_png(mask: &AlphaMask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_mask_png(mask)?).map_err(|e| Error::io(path, e))
}
