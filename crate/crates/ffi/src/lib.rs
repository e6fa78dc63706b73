//! C interface to the endless-loop engine.
//!
//! All objects are opaque handles created by `el_*_new`/`el_*_load`/`el_run`
//! and released with the matching `el_*_free`. Every fallible call returns an
//! [`ElStatus`]; on failure `el_last_error_message` describes what went wrong
//! (per thread, valid until the next failing call on that thread).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use endless_loop::autodirect::{suggest_directions, DEFAULT_CORNER_COUNT, DEFAULT_MAX_DIRECTIONS};
use endless_loop::descriptor::{compute_descriptors, DescriptorBackend};
use endless_loop::pipeline::{run_on, write_outputs, DirectionSpec, LoopResult, ProjectConfig, SolverMode};
use endless_loop::raster::io::{read_image, read_mask, to_rgb8};
use endless_loop::raster::{BinaryMask, RasterImage};
use endless_loop::renderer::write_gif;
use endless_loop::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Io = 4,
    Decode = 5,
    StageFailure = 6,
    Singular = 7,
    Encode = 8,
    BufferTooSmall = 9,
    OutOfRange = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElMode {
    Crf = 0,
    UnaryOnly = 1,
}

/// One suggested direction: unit vector plus its vote weight.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ElDirection {
    pub x: f64,
    pub y: f64,
    pub angle_deg: f64,
    pub votes: f64,
}

pub struct ElImage(RasterImage);

pub struct ElMask(BinaryMask);

pub struct ElConfig(ProjectConfig);

pub struct ElLoop {
    result: LoopResult,
    fps: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn status_of(e: &Error) -> ElStatus {
    match e {
        Error::InvalidInput(_) => ElStatus::InvalidArgument,
        Error::Config(_) | Error::Json(_) => ElStatus::Config,
        Error::Stage { .. } => ElStatus::StageFailure,
        Error::Singular(_) => ElStatus::Singular,
        Error::Io(_) => ElStatus::Io,
        Error::Image(_) => ElStatus::Decode,
        Error::Gif(_) => ElStatus::Encode,
    }
}

fn fail(status: ElStatus, msg: impl Into<String>) -> ElStatus {
    set_error(msg);
    status
}

/// Run `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), ElStatus>) -> ElStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ElStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(ElStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

fn lift<T>(r: Result<T, Error>) -> Result<T, ElStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, ElStatus> {
    if p.is_null() {
        return Err(fail(ElStatus::NullPointer, "path is null"));
    }
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => Err(fail(ElStatus::InvalidArgument, "path is not valid UTF-8")),
    }
}

unsafe fn put<T>(out: *mut *mut T, v: T) {
    *out = Box::into_raw(Box::new(v));
}

macro_rules! nonnull {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return Err(fail(ElStatus::NullPointer, concat!(stringify!($p), " is null")));
        })+
    };
}

/// Message for the last failing call on this thread, or null.
#[no_mangle]
pub extern "C" fn el_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version, static string.
#[no_mangle]
pub extern "C" fn el_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Build an image from packed 8-bit RGB rows (`stride` bytes apart).
///
/// # Safety
/// `data` must point to `stride * height` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn el_image_from_rgb8(
    data: *const u8,
    width: usize,
    height: usize,
    stride: usize,
    out: *mut *mut ElImage,
) -> ElStatus {
    guard(|| {
        nonnull!(data, out);
        if width == 0 || height == 0 || stride < width * 3 {
            return Err(fail(ElStatus::InvalidArgument, "bad image dimensions or stride"));
        }
        let bytes = std::slice::from_raw_parts(data, stride * height);
        let mut v = Vec::with_capacity(width * height * 3);
        for row in bytes.chunks_exact(stride) {
            v.extend(row[..width * 3].iter().map(|&b| b as f32 / 255.0));
        }
        put(out, ElImage(lift(RasterImage::new(width, height, v))?));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn el_image_load(path: *const c_char, out: *mut *mut ElImage) -> ElStatus {
    guard(|| {
        nonnull!(out);
        let p = path_arg(path)?;
        put(out, ElImage(lift(read_image(p))?));
        Ok(())
    })
}

/// # Safety
/// `image` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn el_image_free(image: *mut ElImage) {
    if !image.is_null() {
        drop(Box::from_raw(image));
    }
}

/// Build a mask from one byte per pixel; nonzero means inside.
///
/// # Safety
/// `data` must point to `width * height` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn el_mask_from_u8(data: *const u8, width: usize, height: usize, out: *mut *mut ElMask) -> ElStatus {
    guard(|| {
        nonnull!(data, out);
        let bytes = std::slice::from_raw_parts(data, width * height);
        let m = lift(BinaryMask::new(width, height, bytes.iter().map(|&b| b != 0).collect()))?;
        put(out, ElMask(m));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn el_mask_load(path: *const c_char, out: *mut *mut ElMask) -> ElStatus {
    guard(|| {
        nonnull!(out);
        let p = path_arg(path)?;
        put(out, ElMask(lift(read_mask(p))?));
        Ok(())
    })
}

/// # Safety
/// `mask` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn el_mask_free(mask: *mut ElMask) {
    if !mask.is_null() {
        drop(Box::from_raw(mask));
    }
}

/// Default configuration: direction 0°, 80 frames at 30 fps, CRF solver.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn el_config_new(out: *mut *mut ElConfig) -> ElStatus {
    guard(|| {
        nonnull!(out);
        put(out, ElConfig(ProjectConfig::default()));
        Ok(())
    })
}

/// Parse a JSON configuration; omitted fields take their defaults.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn el_config_from_json(json: *const c_char, out: *mut *mut ElConfig) -> ElStatus {
    guard(|| {
        nonnull!(json, out);
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| fail(ElStatus::InvalidArgument, "json is not valid UTF-8"))?;
        let cfg: ProjectConfig = lift(serde_json::from_str(text).map_err(Error::from))?;
        lift(cfg.validate())?;
        put(out, ElConfig(cfg));
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn el_config_set_direction(config: *mut ElConfig, degrees: f64) -> ElStatus {
    guard(|| {
        nonnull!(config);
        if !degrees.is_finite() {
            return Err(fail(ElStatus::InvalidArgument, "direction must be finite"));
        }
        (*config).0.direction = DirectionSpec::Angle { degrees };
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn el_config_set_auto_direction(config: *mut ElConfig) -> ElStatus {
    guard(|| {
        nonnull!(config);
        (*config).0.direction = DirectionSpec::Auto;
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn el_config_set_loop(config: *mut ElConfig, frames: usize, fps: f64) -> ElStatus {
    guard(|| {
        nonnull!(config);
        let mut c = (*config).0.clone();
        c.frames = frames;
        c.fps = fps;
        lift(c.validate())?;
        (*config).0 = c;
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn el_config_set_soft_boundary(config: *mut ElConfig, soft: bool) -> ElStatus {
    guard(|| {
        nonnull!(config);
        (*config).0.soft_boundary = soft;
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn el_config_set_mode(config: *mut ElConfig, mode: ElMode) -> ElStatus {
    guard(|| {
        nonnull!(config);
        (*config).0.mode = match mode {
            ElMode::Crf => SolverMode::Crf,
            ElMode::UnaryOnly => SolverMode::UnaryOnly,
        };
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn el_config_free(config: *mut ElConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Run the whole pipeline. Blocks until the loop is rendered.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn el_run(
    image: *const ElImage,
    mask: *const ElMask,
    config: *const ElConfig,
    out: *mut *mut ElLoop,
) -> ElStatus {
    guard(|| {
        nonnull!(image, mask, config, out);
        let cfg = &(*config).0;
        let result = lift(run_on(&(*image).0, &(*mask).0, cfg, None))?;
        put(out, ElLoop { result, fps: cfg.fps });
        Ok(())
    })
}

/// # Safety
/// `lp` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn el_loop_frame_count(lp: *const ElLoop) -> usize {
    if lp.is_null() {
        return 0;
    }
    let lp = &*lp;
    lp.result.frames.len()
}

/// # Safety
/// `lp` must be a live handle; `width` and `height` writable.
#[no_mangle]
pub unsafe extern "C" fn el_loop_dimensions(lp: *const ElLoop, width: *mut usize, height: *mut usize) -> ElStatus {
    guard(|| {
        nonnull!(lp, width, height);
        let lp = &*lp;
        let (w, h) = lp.result.frames.frames[0].dimensions();
        *width = w;
        *height = h;
        Ok(())
    })
}

/// Copy frame `k` as packed 8-bit RGB (`width * height * 3` bytes).
///
/// # Safety
/// `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn el_loop_copy_frame_rgb8(lp: *const ElLoop, k: usize, buf: *mut u8, len: usize) -> ElStatus {
    guard(|| {
        nonnull!(lp, buf);
        let lp = &*lp;
        let frames = &lp.result.frames.frames;
        let f = frames
            .get(k)
            .ok_or_else(|| fail(ElStatus::OutOfRange, format!("frame {k} of {}", frames.len())))?;
        let bytes = to_rgb8(f);
        if len < bytes.len() {
            return Err(fail(ElStatus::BufferTooSmall, format!("need {} bytes, got {len}", bytes.len())));
        }
        ptr::copy_nonoverlapping(bytes.as_ptr(), buf, bytes.len());
        Ok(())
    })
}

/// # Safety
/// `lp` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn el_loop_write_gif(lp: *const ElLoop, path: *const c_char) -> ElStatus {
    guard(|| {
        nonnull!(lp);
        let p = path_arg(path)?;
        let lp = &*lp;
        lift(write_gif(&lp.result.frames, lp.fps, &p))
    })
}

/// Write numbered PNG frames and `loop.json` into `dir` (created if missing).
///
/// # Safety
/// `lp` must be a live handle; `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn el_loop_write_frames(lp: *const ElLoop, dir: *const c_char) -> ElStatus {
    guard(|| {
        nonnull!(lp);
        let d = path_arg(dir)?;
        let lp = &*lp;
        lift(write_outputs(&lp.result, lp.fps, "", Some(&d), None).map(|_| ()))
    })
}

/// # Safety
/// `lp` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn el_loop_free(lp: *mut ElLoop) {
    if !lp.is_null() {
        drop(Box::from_raw(lp));
    }
}

/// Suggest up to `capacity` motion directions (at most 3). `count` receives
/// the number written.
///
/// # Safety
/// `out` must point to `capacity` writable entries.
#[no_mangle]
pub unsafe extern "C" fn el_suggest_directions(
    image: *const ElImage,
    out: *mut ElDirection,
    capacity: usize,
    count: *mut usize,
) -> ElStatus {
    guard(|| {
        nonnull!(image, count);
        if capacity > 0 && out.is_null() {
            return Err(fail(ElStatus::NullPointer, "out is null"));
        }
        let img = &(*image).0;
        let desc = lift(compute_descriptors(img, &DescriptorBackend::default()))?;
        let vote = lift(suggest_directions(img, &desc, DEFAULT_CORNER_COUNT, DEFAULT_MAX_DIRECTIONS))?;
        let n = vote.winners.len().min(capacity);
        for (i, w) in vote.winners.iter().take(n).enumerate() {
            *out.add(i) = ElDirection { x: w.direction.x, y: w.direction.y, angle_deg: w.angle_deg, votes: w.votes };
        }
        *count = n;
        Ok(())
    })
}
