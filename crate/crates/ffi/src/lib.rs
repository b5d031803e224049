//! C ABI for the segmenter: opaque handles, status codes, and a
//! thread-local error message. The header is generated into
//! `include/iem.h` at build time.
//!
//! Every constructor hands ownership to the caller; release handles with
//! the matching `*_free` function. Passing null where a handle is
//! required yields `NullPointer` rather than a crash.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::slice;

use iem::cli::RunSettings;
use iem::{multi_init_run, preprocess, Image, KernelSpec, Mask, ObjectiveVariant, Toggles};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IemStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    RuntimeError = 3,
}

/// Objective variant selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IemObjective {
    L1Mask = 0,
    L2Mask = 1,
    L1ImgL1 = 2,
    L2ImgL2 = 3,
}

/// Opaque image handle (unit-normalized, channel-major internally).
pub struct IemImage {
    inner: Image,
}

/// Opaque configuration handle; starts from the default parameters.
pub struct IemOptions {
    settings: RunSettings,
}

/// Opaque binary mask handle.
pub struct IemMask {
    inner: Mask,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl std::fmt::Display) {
    let owned = CString::new(msg.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn fail(status: IemStatus, msg: impl std::fmt::Display) -> IemStatus {
    set_error(msg);
    status
}

/// Message describing the most recent failure on this thread. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn iem_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn iem_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds an image from 8-bit pixels in row-major, channel-interleaved
/// order (`height * width * channels` bytes); values are scaled by 255.
/// `channels` must be 1 or 3.
///
/// # Safety
/// `pixels` must point to at least `height * width * channels` readable
/// bytes and `out` must be a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn iem_image_create(
    pixels: *const u8,
    channels: usize,
    height: usize,
    width: usize,
    out: *mut *mut IemImage,
) -> IemStatus {
    if pixels.is_null() || out.is_null() {
        return fail(IemStatus::NullPointer, "pixels and out must be non-null");
    }
    if !(channels == 1 || channels == 3) || height == 0 || width == 0 {
        return fail(
            IemStatus::InvalidArgument,
            format!("bad dimensions {channels}x{height}x{width}"),
        );
    }
    let data = slice::from_raw_parts(pixels, channels * height * width);
    let image = Image::from_fn(channels, height, width, |c, r, col| {
        f64::from(data[(r * width + col) * channels + c]) / 255.0
    });
    match image {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(IemImage { inner }));
            IemStatus::Ok
        }
        Err(err) => fail(IemStatus::InvalidArgument, err),
    }
}

/// # Safety
/// `image` must be null or a pointer from [`iem_image_create`], not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn iem_image_free(image: *mut IemImage) {
    if !image.is_null() {
        drop(Box::from_raw(image));
    }
}

/// Creates an options handle holding the default configuration.
///
/// # Safety
/// `out` must be a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn iem_options_create(out: *mut *mut IemOptions) -> IemStatus {
    if out.is_null() {
        return fail(IemStatus::NullPointer, "out must be non-null");
    }
    *out = Box::into_raw(Box::new(IemOptions { settings: RunSettings::default() }));
    IemStatus::Ok
}

/// # Safety
/// `options` must be null or a pointer from [`iem_options_create`], not
/// yet freed.
#[no_mangle]
pub unsafe extern "C" fn iem_options_free(options: *mut IemOptions) {
    if !options.is_null() {
        drop(Box::from_raw(options));
    }
}

unsafe fn with_options(
    options: *mut IemOptions,
    f: impl FnOnce(&mut RunSettings) -> Result<(), iem::Error>,
) -> IemStatus {
    let Some(opts) = options.as_mut() else {
        return fail(IemStatus::NullPointer, "options handle is null");
    };
    match f(&mut opts.settings) {
        Ok(()) => IemStatus::Ok,
        Err(err) => fail(IemStatus::InvalidArgument, err),
    }
}

/// # Safety
/// `options` must be a live handle from [`iem_options_create`].
#[no_mangle]
pub unsafe extern "C" fn iem_options_set_iterations(
    options: *mut IemOptions,
    iterations: usize,
) -> IemStatus {
    with_options(options, |s| {
        s.config.iterations = iterations;
        s.config.validate()
    })
}

/// # Safety
/// `options` must be a live handle from [`iem_options_create`].
#[no_mangle]
pub unsafe extern "C" fn iem_options_set_lambda(
    options: *mut IemOptions,
    lambda: f64,
) -> IemStatus {
    with_options(options, |s| {
        s.config.lambda = lambda;
        s.config.validate()
    })
}

/// # Safety
/// `options` must be a live handle from [`iem_options_create`].
#[no_mangle]
pub unsafe extern "C" fn iem_options_set_kernel(
    options: *mut IemOptions,
    size: usize,
    sigma: f64,
    stacked: bool,
) -> IemStatus {
    with_options(options, |s| {
        s.config.kernel = if stacked {
            KernelSpec::stacked(size, sigma)?
        } else {
            KernelSpec::new(size, sigma)?
        };
        Ok(())
    })
}

/// Replaces the square initialization sizes.
///
/// # Safety
/// `options` must be a live handle and `sizes` must point to `count`
/// readable values.
#[no_mangle]
pub unsafe extern "C" fn iem_options_set_init_sizes(
    options: *mut IemOptions,
    sizes: *const usize,
    count: usize,
) -> IemStatus {
    if sizes.is_null() {
        return fail(IemStatus::NullPointer, "sizes must be non-null");
    }
    let sizes = slice::from_raw_parts(sizes, count).to_vec();
    with_options(options, |s| {
        s.config.init_sizes = sizes;
        s.config.validate()
    })
}

/// # Safety
/// `options` must be a live handle from [`iem_options_create`].
#[no_mangle]
pub unsafe extern "C" fn iem_options_set_objective(
    options: *mut IemOptions,
    objective: IemObjective,
) -> IemStatus {
    let variant: ObjectiveVariant = match objective {
        IemObjective::L1Mask => "l1-mask",
        IemObjective::L2Mask => "l2-mask",
        IemObjective::L1ImgL1 => "l1-imgl1",
        IemObjective::L2ImgL2 => "l2-imgl2",
    }
    .parse()
    .expect("known variant name");
    with_options(options, |s| {
        s.config.variant = variant;
        Ok(())
    })
}

/// # Safety
/// `options` must be a live handle from [`iem_options_create`].
#[no_mangle]
pub unsafe extern "C" fn iem_options_set_toggles(
    options: *mut IemOptions,
    regularizer: bool,
    smoothing: bool,
    boundary_restricted: bool,
) -> IemStatus {
    with_options(options, |s| {
        s.config.toggles = Toggles {
            regularizer_on: regularizer,
            smoothing_on: smoothing,
            boundary_restricted,
        };
        Ok(())
    })
}

/// # Safety
/// `options` must be a live handle from [`iem_options_create`].
#[no_mangle]
pub unsafe extern "C" fn iem_options_set_strict_iterations(
    options: *mut IemOptions,
    strict: bool,
) -> IemStatus {
    with_options(options, |s| {
        s.config.strict_iterations = strict;
        Ok(())
    })
}

/// Side length images are resized and center-cropped to before the
/// greedy search.
///
/// # Safety
/// `options` must be a live handle from [`iem_options_create`].
#[no_mangle]
pub unsafe extern "C" fn iem_options_set_target_size(
    options: *mut IemOptions,
    target_size: usize,
) -> IemStatus {
    if target_size == 0 {
        return fail(IemStatus::InvalidArgument, "target size must be positive");
    }
    with_options(options, |s| {
        s.target_size = target_size;
        Ok(())
    })
}

/// Preprocesses the image and runs the greedy search from every
/// configured initialization, returning the selected mask. `options`
/// may be null for the default configuration.
///
/// # Safety
/// `image` must be a live handle, `options` null or a live handle, and
/// `out` a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn iem_segment(
    image: *const IemImage,
    options: *const IemOptions,
    out: *mut *mut IemMask,
) -> IemStatus {
    let Some(image) = image.as_ref() else {
        return fail(IemStatus::NullPointer, "image handle is null");
    };
    if out.is_null() {
        return fail(IemStatus::NullPointer, "out must be non-null");
    }
    let default_settings;
    let settings = match options.as_ref() {
        Some(o) => &o.settings,
        None => {
            default_settings = RunSettings::default();
            &default_settings
        }
    };
    for &size in &settings.config.init_sizes {
        if size >= settings.target_size {
            return fail(
                IemStatus::InvalidArgument,
                format!(
                    "init size {size} must be smaller than the target size {}",
                    settings.target_size
                ),
            );
        }
    }
    let prepared = preprocess(&image.inner, settings.target_size);
    match multi_init_run(&prepared, &settings.config) {
        Ok(result) => {
            *out = Box::into_raw(Box::new(IemMask { inner: result.mask }));
            IemStatus::Ok
        }
        Err(err) => fail(IemStatus::RuntimeError, err),
    }
}

/// # Safety
/// `mask` must be null or a live handle from [`iem_segment`].
#[no_mangle]
pub unsafe extern "C" fn iem_mask_height(mask: *const IemMask) -> usize {
    mask.as_ref().map_or(0, |m| m.inner.height())
}

/// # Safety
/// `mask` must be null or a live handle from [`iem_segment`].
#[no_mangle]
pub unsafe extern "C" fn iem_mask_width(mask: *const IemMask) -> usize {
    mask.as_ref().map_or(0, |m| m.inner.width())
}

/// Copies the mask into `buffer` as row-major 0/1 bytes.
///
/// # Safety
/// `mask` must be a live handle and `buffer` must hold at least `len`
/// writable bytes, with `len >= height * width`.
#[no_mangle]
pub unsafe extern "C" fn iem_mask_copy(
    mask: *const IemMask,
    buffer: *mut u8,
    len: usize,
) -> IemStatus {
    let Some(mask) = mask.as_ref() else {
        return fail(IemStatus::NullPointer, "mask handle is null");
    };
    if buffer.is_null() {
        return fail(IemStatus::NullPointer, "buffer must be non-null");
    }
    let needed = mask.inner.height() * mask.inner.width();
    if len < needed {
        return fail(
            IemStatus::InvalidArgument,
            format!("buffer holds {len} bytes, {needed} needed"),
        );
    }
    let dst = slice::from_raw_parts_mut(buffer, needed);
    let w = mask.inner.width();
    for r in 0..mask.inner.height() {
        for c in 0..w {
            dst[r * w + c] = mask.inner.get(r, c);
        }
    }
    IemStatus::Ok
}

/// # Safety
/// `mask` must be null or a pointer from [`iem_segment`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iem_mask_free(mask: *mut IemMask) {
    if !mask.is_null() {
        drop(Box::from_raw(mask));
    }
}
