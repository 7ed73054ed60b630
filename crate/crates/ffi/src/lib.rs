//! C ABI over the animation pipeline.
//!
//! Objects cross the boundary as opaque handles that the caller frees with the
//! matching `*_free` function. Every fallible call returns an [`MlStatus`];
//! on failure [`ml_last_error`] describes the cause. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use movelike::motion::DrivingSequence;
use movelike::pipeline::{run_pipeline, Animation, OutputKind, PipelineConfig};
use movelike::raster::read_png;
use movelike::{Error, ErrorKind, RasterImage};

/// Call outcome. The nonzero input/processing/io values match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlStatus {
    Ok = 0,
    InvalidInput = 2,
    Processing = 3,
    Io = 4,
    NullPointer = 10,
    Panic = 11,
}

/// RGBA image.
pub struct MlImage {
    inner: RasterImage,
}

/// Pipeline configuration.
pub struct MlConfig {
    inner: PipelineConfig,
}

/// Driving keypoint sequence.
pub struct MlSequence {
    inner: DrivingSequence,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MlStatus {
    match e.kind() {
        ErrorKind::InvalidInput => MlStatus::InvalidInput,
        ErrorKind::Processing => MlStatus::Processing,
        ErrorKind::Io => MlStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
    Utf8(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Run `f`, translating errors and panics into a status and the last-error slot.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MlStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("{what} is null"));
            MlStatus::NullPointer
        }
        Ok(Err(Failure::Utf8(what))) => {
            set_error(format!("{what} is not valid UTF-8"));
            MlStatus::InvalidInput
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            MlStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message for the most recent failed call on this thread, or null after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ml_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ml_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_image_load_png(path: *const c_char, out: *mut *mut MlImage) -> MlStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let inner = read_png(Path::new(path))?;
        store(out, MlImage { inner })
    })
}

/// Build an image from `width * height * 4` bytes of row-major RGBA.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_image_from_rgba8(
    width: usize,
    height: usize,
    data: *const u8,
    len: usize,
    out: *mut *mut MlImage,
) -> MlStatus {
    guard(|| {
        if data.is_null() {
            return Err(Failure::Null("data"));
        }
        let bytes = std::slice::from_raw_parts(data, len);
        if width.checked_mul(height).and_then(|n| n.checked_mul(4)) != Some(len) {
            return Err(Error::SizeMismatch {
                expected: (width, height),
                actual: (len / 4, 1),
            }
            .into());
        }
        let inner = RasterImage::from_rgba8(width, height, bytes)?;
        store(out, MlImage { inner })
    })
}

/// # Safety
/// `img` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ml_image_width(img: *const MlImage) -> usize {
    img.as_ref().map_or(0, |i| i.inner.width())
}

/// # Safety
/// `img` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ml_image_height(img: *const MlImage) -> usize {
    img.as_ref().map_or(0, |i| i.inner.height())
}

/// # Safety
/// `img` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ml_image_free(img: *mut MlImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

/// Default configuration.
#[no_mangle]
pub extern "C" fn ml_config_default() -> *mut MlConfig {
    Box::into_raw(Box::new(MlConfig {
        inner: PipelineConfig::default(),
    }))
}

/// Parse a JSON configuration; unknown keys and violated invariants are rejected.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_config_from_json(json: *const c_char, out: *mut *mut MlConfig) -> MlStatus {
    guard(|| {
        let inner = PipelineConfig::from_json(str_arg(json, "json")?)?;
        store(out, MlConfig { inner })
    })
}

/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ml_config_free(cfg: *mut MlConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_sequence_from_json(json: *const c_char, out: *mut *mut MlSequence) -> MlStatus {
    guard(|| {
        let inner = DrivingSequence::from_json(str_arg(json, "json")?)?;
        store(out, MlSequence { inner })
    })
}

/// # Safety
/// `seq` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ml_sequence_frame_count(seq: *const MlSequence) -> usize {
    seq.as_ref().map_or(0, |s| s.inner.frames.len())
}

/// # Safety
/// `seq` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ml_sequence_free(seq: *mut MlSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// Run the whole pipeline and return the animation as GIF bytes, whatever the
/// configured output kind. Release the bytes with [`ml_bytes_free`].
///
/// # Safety
/// Handles must be live; `out_data` and `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_run_pipeline(
    img: *const MlImage,
    seq: *const MlSequence,
    cfg: *const MlConfig,
    out_data: *mut *mut u8,
    out_len: *mut usize,
) -> MlStatus {
    guard(|| {
        let img = handle(img, "image")?;
        let seq = handle(seq, "sequence")?;
        let cfg = handle(cfg, "config")?;
        if out_data.is_null() || out_len.is_null() {
            return Err(Failure::Null("output pointer"));
        }
        let cfg = PipelineConfig {
            output: OutputKind::Gif,
            ..cfg.inner.clone()
        };
        let Animation::Gif(bytes) = run_pipeline(&img.inner, &seq.inner, &cfg, None)?.0 else {
            unreachable!("output kind forced to GIF");
        };
        let boxed = bytes.into_boxed_slice();
        *out_len = boxed.len();
        *out_data = Box::into_raw(boxed).cast();
        Ok(())
    })
}

/// # Safety
/// `data` and `len` must come from one successful [`ml_run_pipeline`] call, or `data` must be null.
#[no_mangle]
pub unsafe extern "C" fn ml_bytes_free(data: *mut u8, len: usize) {
    if !data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(data, len)));
    }
}
