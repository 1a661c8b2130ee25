//! C ABI over the `isocircle` detector.
//!
//! Images and result sets are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns an
//! [`IcStatus`]; on failure a message for the calling thread is available
//! from [`ic_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use isocircle::{detect_with_stats, Detection, DetectorConfig, Error, GrayImage, Stats, Strategy};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    OutOfRange = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcStrategy {
    Its = 0,
    ThreePoint = 1,
    FourPoint = 2,
}

/// Flat mirror of the detector configuration. `d_cap <= 0` means no cap.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcConfig {
    pub sigma: f64,
    pub ksize: u32,
    pub smooth_sigma: f64,
    pub canny_low: f64,
    pub canny_high: f64,
    pub delta_k: f64,
    pub delta_p: f64,
    pub t_r: f64,
    pub d_min: f64,
    pub d0: f64,
    pub d_cap: f64,
    pub delta_d: f64,
    pub align_min: f64,
    pub n_sectors: u32,
    pub min_votes_ratio: f64,
    pub r_min: f64,
    pub cluster_min_members: u32,
    pub iteration_budget_factor: f64,
    pub min_segment: u32,
    pub strategy: IcStrategy,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcCircle {
    pub a: f64,
    pub b: f64,
    pub r: f64,
    pub votes: u32,
    pub n_sectors: u32,
    pub completeness: f64,
    /// Edge points that supported validation.
    pub support: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IcStats {
    pub edge_pixels: u64,
    pub segments: u64,
    pub budget: u64,
    pub iterations: u64,
    pub pairs_accepted: u64,
    pub rejected_too_close: u64,
    pub rejected_not_isosceles: u64,
    pub rejected_parallel: u64,
    pub rejected_no_intersection: u64,
    pub rejected_collinear: u64,
    pub rejected_fourth_point: u64,
    pub rejected_radius: u64,
    pub clusters_created: u64,
    pub candidates_refined: u64,
    pub candidates_validated: u64,
    pub candidates_rejected: u64,
}

/// Grayscale image with intensities in [0, 1].
pub struct IcImage(GrayImage);

/// Detections of one run, in canonical order, plus its counters.
pub struct IcDetections {
    items: Vec<Detection>,
    stats: Stats,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: IcStatus, msg: impl Into<String>) -> IcStatus {
    set_error(msg);
    status
}

fn from_error(e: &Error) -> IcStatus {
    let status = if e.is_io() { IcStatus::Io } else { IcStatus::InvalidArgument };
    fail(status, e.to_string())
}

/// Runs `f`, clearing the thread's error first and turning a panic into
/// [`IcStatus::Panic`].
fn guarded(f: impl FnOnce() -> IcStatus) -> IcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| p.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".into());
        fail(IcStatus::Panic, format!("internal error: {msg}"))
    })
}

impl From<&DetectorConfig> for IcConfig {
    fn from(c: &DetectorConfig) -> Self {
        IcConfig {
            sigma: c.sigma,
            ksize: c.ksize as u32,
            smooth_sigma: c.smooth_sigma,
            canny_low: c.canny_low,
            canny_high: c.canny_high,
            delta_k: c.sampling.delta_k,
            delta_p: c.sampling.delta_p,
            t_r: c.sampling.t_r,
            d_min: c.sampling.d_min,
            d0: c.sampling.d0,
            d_cap: c.sampling.d_cap.unwrap_or(0.0),
            delta_d: c.refine.delta_d,
            align_min: c.refine.align_min,
            n_sectors: c.n_sectors as u32,
            min_votes_ratio: c.min_votes_ratio,
            r_min: c.r_min,
            cluster_min_members: c.cluster_min_members as u32,
            iteration_budget_factor: c.iteration_budget_factor,
            min_segment: c.min_segment as u32,
            strategy: match c.strategy {
                Strategy::Its => IcStrategy::Its,
                Strategy::ThreePoint => IcStrategy::ThreePoint,
                Strategy::FourPoint => IcStrategy::FourPoint,
            },
            seed: c.rng_seed,
        }
    }
}

impl From<&IcConfig> for DetectorConfig {
    fn from(c: &IcConfig) -> Self {
        let mut cfg = DetectorConfig {
            sigma: c.sigma,
            ksize: c.ksize as usize,
            smooth_sigma: c.smooth_sigma,
            canny_low: c.canny_low,
            canny_high: c.canny_high,
            n_sectors: c.n_sectors as usize,
            min_votes_ratio: c.min_votes_ratio,
            r_min: c.r_min,
            cluster_min_members: c.cluster_min_members as usize,
            iteration_budget_factor: c.iteration_budget_factor,
            min_segment: c.min_segment as usize,
            strategy: match c.strategy {
                IcStrategy::Its => Strategy::Its,
                IcStrategy::ThreePoint => Strategy::ThreePoint,
                IcStrategy::FourPoint => Strategy::FourPoint,
            },
            rng_seed: c.seed,
            ..DetectorConfig::default()
        };
        cfg.sampling.delta_k = c.delta_k;
        cfg.sampling.delta_p = c.delta_p;
        cfg.sampling.t_r = c.t_r;
        cfg.sampling.d_min = c.d_min;
        cfg.sampling.d0 = c.d0;
        cfg.sampling.d_cap = (c.d_cap > 0.0).then_some(c.d_cap);
        cfg.refine.delta_d = c.delta_d;
        cfg.refine.align_min = c.align_min;
        cfg
    }
}

impl From<&Detection> for IcCircle {
    fn from(d: &Detection) -> Self {
        IcCircle {
            a: d.circle.a,
            b: d.circle.b,
            r: d.circle.r,
            votes: d.votes as u32,
            n_sectors: d.n_sectors as u32,
            completeness: d.completeness,
            support: d.support as u32,
        }
    }
}

impl From<&Stats> for IcStats {
    fn from(s: &Stats) -> Self {
        let v = s.fields().map(|(_, v)| v as u64);
        IcStats {
            edge_pixels: v[0],
            segments: v[1],
            budget: v[2],
            iterations: v[3],
            pairs_accepted: v[4],
            rejected_too_close: v[5],
            rejected_not_isosceles: v[6],
            rejected_parallel: v[7],
            rejected_no_intersection: v[8],
            rejected_collinear: v[9],
            rejected_fourth_point: v[10],
            rejected_radius: v[11],
            clusters_created: v[12],
            candidates_refined: v[13],
            candidates_validated: v[14],
            candidates_rejected: v[15],
        }
    }
}

/// Message describing the last failed call on this thread, or NULL. The
/// pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn ic_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ic_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Writes the default configuration to `out`.
///
/// # Safety
/// `out` must be NULL or valid for writing one `IcConfig`.
#[no_mangle]
pub unsafe extern "C" fn ic_config_default(out: *mut IcConfig) -> IcStatus {
    guarded(|| {
        if out.is_null() {
            return fail(IcStatus::NullPointer, "out is NULL");
        }
        unsafe { out.write(IcConfig::from(&DetectorConfig::default())) };
        IcStatus::Ok
    })
}

/// Builds an image from 8-bit gray rows `stride` bytes apart (`stride` 0
/// means tightly packed).
///
/// # Safety
/// `data` must point to `height` rows of `stride` bytes (at least `width`
/// readable in each); `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn ic_image_from_gray8(
    width: usize,
    height: usize,
    data: *const u8,
    stride: usize,
    out: *mut *mut IcImage,
) -> IcStatus {
    guarded(|| {
        if data.is_null() || out.is_null() {
            return fail(IcStatus::NullPointer, "data or out is NULL");
        }
        let stride = if stride == 0 { width } else { stride };
        if stride < width {
            return fail(IcStatus::InvalidArgument, format!("stride {stride} is smaller than width {width}"));
        }
        let Some(len) = stride.checked_mul(height.saturating_sub(1)).and_then(|n| n.checked_add(width)) else {
            return fail(IcStatus::InvalidArgument, "image size overflows");
        };
        let raw = unsafe { std::slice::from_raw_parts(data, if height == 0 { 0 } else { len }) };
        let packed: Vec<u8> = (0..height).flat_map(|y| &raw[y * stride..y * stride + width]).copied().collect();
        match GrayImage::from_u8(width, height, &packed) {
            Ok(img) => {
                unsafe { out.write(Box::into_raw(Box::new(IcImage(img)))) };
                IcStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Loads a PNG or binary PGM file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid for writing
/// one pointer.
#[no_mangle]
pub unsafe extern "C" fn ic_image_load(path: *const c_char, out: *mut *mut IcImage) -> IcStatus {
    guarded(|| {
        if path.is_null() || out.is_null() {
            return fail(IcStatus::NullPointer, "path or out is NULL");
        }
        let Ok(path) = unsafe { CStr::from_ptr(path) }.to_str() else {
            return fail(IcStatus::InvalidArgument, "path is not valid UTF-8");
        };
        match GrayImage::load(path) {
            Ok(img) => {
                unsafe { out.write(Box::into_raw(Box::new(IcImage(img)))) };
                IcStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `img` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ic_image_width(img: *const IcImage) -> usize {
    unsafe { img.as_ref() }.map_or(0, |i| i.0.width())
}

/// # Safety
/// `img` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ic_image_height(img: *const IcImage) -> usize {
    unsafe { img.as_ref() }.map_or(0, |i| i.0.height())
}

/// # Safety
/// `img` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ic_image_free(img: *mut IcImage) {
    if !img.is_null() {
        drop(unsafe { Box::from_raw(img) });
    }
}

/// Detects circles in `img`. A NULL `config` uses the defaults.
///
/// # Safety
/// `img` must be a live image handle, `config` NULL or a valid `IcConfig`,
/// and `out` valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn ic_detect(img: *const IcImage, config: *const IcConfig, out: *mut *mut IcDetections) -> IcStatus {
    guarded(|| {
        let (Some(img), false) = (unsafe { img.as_ref() }, out.is_null()) else {
            return fail(IcStatus::NullPointer, "img or out is NULL");
        };
        let cfg = unsafe { config.as_ref() }.map_or_else(DetectorConfig::default, DetectorConfig::from);
        match detect_with_stats(&img.0, &cfg) {
            Ok((items, stats)) => {
                unsafe { out.write(Box::into_raw(Box::new(IcDetections { items, stats }))) };
                IcStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `d` must be NULL or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn ic_detections_len(d: *const IcDetections) -> usize {
    unsafe { d.as_ref() }.map_or(0, |d| d.items.len())
}

/// Copies detection `index` to `out`.
///
/// # Safety
/// `d` must be a live result handle and `out` valid for writing one `IcCircle`.
#[no_mangle]
pub unsafe extern "C" fn ic_detections_get(d: *const IcDetections, index: usize, out: *mut IcCircle) -> IcStatus {
    guarded(|| {
        let (Some(d), false) = (unsafe { d.as_ref() }, out.is_null()) else {
            return fail(IcStatus::NullPointer, "detections or out is NULL");
        };
        match d.items.get(index) {
            Some(x) => {
                unsafe { out.write(IcCircle::from(x)) };
                IcStatus::Ok
            }
            None => fail(IcStatus::OutOfRange, format!("index {index} out of range for {} detections", d.items.len())),
        }
    })
}

/// Copies the run's counters to `out`.
///
/// # Safety
/// `d` must be a live result handle and `out` valid for writing one `IcStats`.
#[no_mangle]
pub unsafe extern "C" fn ic_detections_stats(d: *const IcDetections, out: *mut IcStats) -> IcStatus {
    guarded(|| {
        let (Some(d), false) = (unsafe { d.as_ref() }, out.is_null()) else {
            return fail(IcStatus::NullPointer, "detections or out is NULL");
        };
        unsafe { out.write(IcStats::from(&d.stats)) };
        IcStatus::Ok
    })
}

/// # Safety
/// `d` must be NULL or a result handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ic_detections_free(d: *mut IcDetections) {
    if !d.is_null() {
        drop(unsafe { Box::from_raw(d) });
    }
}
