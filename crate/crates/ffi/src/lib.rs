//! C ABI over `evtaug`.
//!
//! Streams and rasters cross the boundary as opaque handles created by this
//! library and released with the matching `*_free` function. Every fallible
//! call returns an [`EvtStatus`]; on failure a message describing the error
//! is available from [`evt_last_error`] on the same thread. Enumerations are
//! passed as plain integers (see the `EVT_*` constants) so that an unknown
//! value from C is an `EVT_INVALID_ARGUMENT` rather than undefined behavior.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use evtaug::repr::{rasterize, Raster, RasterKind};
use evtaug::transform::{apply_spatial_rotation, apply_sts, apply_vpt, default_tau, vpt_matrix};
use evtaug::{
    canonicalize, decode, encode, normalize_time, raster_distance, CodecError, Event, EventStream, FormatTag, Plane,
    RotationParams, SensorGeometry, StreamError, StsParams, TransformStats, VptParams,
};

pub const EVT_FORMAT_ATIS_BIN: u32 = 0;
pub const EVT_FORMAT_CSV: u32 = 1;
pub const EVT_FORMAT_NATIVE: u32 = 2;

pub const EVT_PLANE_YT: u32 = 0;
pub const EVT_PLANE_XT: u32 = 1;

pub const EVT_RASTER_FRAME: u32 = 0;
pub const EVT_RASTER_COUNT: u32 = 1;
pub const EVT_RASTER_VOXEL: u32 = 2;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfBounds = 3,
    Decode = 4,
    Encode = 5,
    Transform = 6,
    Raster = 7,
    BufferTooSmall = 8,
    Panic = 99,
}

/// One event as seen from C.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvtEvent {
    pub y: u16,
    pub x: u16,
    pub t: u64,
    pub p: i8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvtTransformStats {
    pub input_count: u64,
    pub retained_count: u64,
    pub discarded_spatial: u64,
    pub discarded_temporal: u64,
}

impl From<TransformStats> for EvtTransformStats {
    fn from(s: TransformStats) -> Self {
        Self {
            input_count: s.input_count as u64,
            retained_count: s.retained_count as u64,
            discarded_spatial: s.discarded_spatial as u64,
            discarded_temporal: s.discarded_temporal as u64,
        }
    }
}

/// Opaque canonical event stream.
pub struct EvtStream(EventStream);

/// Opaque dense raster. Values are stored as `f64`, channel-major.
pub struct EvtRaster(Raster);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: EvtStatus, msg: impl std::fmt::Display) -> EvtStatus {
    set_error(msg.to_string());
    status
}

fn guard(f: impl FnOnce() -> EvtStatus) -> EvtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(EvtStatus::Panic, "internal panic"),
    }
}

fn format_from(code: u32) -> Option<FormatTag> {
    match code {
        EVT_FORMAT_ATIS_BIN => Some(FormatTag::AtisBin),
        EVT_FORMAT_CSV => Some(FormatTag::Csv),
        EVT_FORMAT_NATIVE => Some(FormatTag::Native),
        _ => None,
    }
}

fn plane_from(code: u32) -> Option<Plane> {
    match code {
        EVT_PLANE_YT => Some(Plane::Yt),
        EVT_PLANE_XT => Some(Plane::Xt),
        _ => None,
    }
}

fn raster_kind_from(code: u32) -> Option<RasterKind> {
    match code {
        EVT_RASTER_FRAME => Some(RasterKind::Frame),
        EVT_RASTER_COUNT => Some(RasterKind::Count),
        EVT_RASTER_VOXEL => Some(RasterKind::Voxel),
        _ => None,
    }
}

fn stream_status(e: &StreamError) -> EvtStatus {
    match e {
        StreamError::OutOfBounds { .. } => EvtStatus::OutOfBounds,
        _ => EvtStatus::InvalidArgument,
    }
}

unsafe fn put_stream(out: *mut *mut EvtStream, stream: EventStream) -> EvtStatus {
    *out = Box::into_raw(Box::new(EvtStream(stream)));
    EvtStatus::Ok
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn evt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn evt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a canonical stream from `len` events. `events` may be NULL when
/// `len` is 0.
#[no_mangle]
pub unsafe extern "C" fn evt_stream_new(
    events: *const EvtEvent,
    len: usize,
    width: u16,
    height: u16,
    out: *mut *mut EvtStream,
) -> EvtStatus {
    guard(|| {
        if out.is_null() || (events.is_null() && len > 0) {
            return fail(EvtStatus::NullPointer, "null pointer argument");
        }
        let geometry = match SensorGeometry::new(width, height) {
            Ok(g) => g,
            Err(e) => return fail(EvtStatus::InvalidArgument, e),
        };
        let raw = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(events, len)
        };
        let events = raw.iter().map(|e| Event::new(e.y, e.x, e.t, e.p)).collect();
        match canonicalize(events, geometry) {
            Ok(s) => put_stream(out, s),
            Err(e) => fail(stream_status(&e), e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn evt_stream_free(stream: *mut EvtStream) {
    if !stream.is_null() {
        drop(Box::from_raw(stream));
    }
}

/// Number of events, or 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn evt_stream_len(stream: *const EvtStream) -> usize {
    stream.as_ref().map_or(0, |s| s.0.len())
}

#[no_mangle]
pub unsafe extern "C" fn evt_stream_geometry(
    stream: *const EvtStream,
    width: *mut u16,
    height: *mut u16,
) -> EvtStatus {
    let (Some(s), false, false) = (stream.as_ref(), width.is_null(), height.is_null()) else {
        return fail(EvtStatus::NullPointer, "null pointer argument");
    };
    let g = s.0.geometry();
    *width = g.width;
    *height = g.height;
    EvtStatus::Ok
}

/// Copies the events into `out` (capacity `cap`). `written` receives the
/// stream length; if `cap` is too small nothing is copied and
/// `EVT_BUFFER_TOO_SMALL` is returned.
#[no_mangle]
pub unsafe extern "C" fn evt_stream_events(
    stream: *const EvtStream,
    out: *mut EvtEvent,
    cap: usize,
    written: *mut usize,
) -> EvtStatus {
    let Some(s) = stream.as_ref() else {
        return fail(EvtStatus::NullPointer, "null stream");
    };
    if written.is_null() {
        return fail(EvtStatus::NullPointer, "null length pointer");
    }
    let events = s.0.events();
    *written = events.len();
    if events.is_empty() {
        return EvtStatus::Ok;
    }
    if cap < events.len() {
        return fail(EvtStatus::BufferTooSmall, format!("need room for {} events", events.len()));
    }
    if out.is_null() {
        return fail(EvtStatus::NullPointer, "null output buffer");
    }
    let dst = std::slice::from_raw_parts_mut(out, events.len());
    for (d, e) in dst.iter_mut().zip(events) {
        *d = EvtEvent {
            y: e.y,
            x: e.x,
            t: e.t,
            p: e.p,
        };
    }
    EvtStatus::Ok
}

/// Decodes `len` bytes. Pass `width = height = 0` to use the file's own
/// geometry (native) or infer it from the data (bin, csv).
#[no_mangle]
pub unsafe extern "C" fn evt_decode(
    bytes: *const u8,
    len: usize,
    format: u32,
    width: u16,
    height: u16,
    out: *mut *mut EvtStream,
) -> EvtStatus {
    guard(|| {
        if out.is_null() || (bytes.is_null() && len > 0) {
            return fail(EvtStatus::NullPointer, "null pointer argument");
        }
        let Some(format) = format_from(format) else {
            return fail(EvtStatus::InvalidArgument, format!("unknown format code {format}"));
        };
        let geometry = if width == 0 && height == 0 {
            None
        } else {
            match SensorGeometry::new(width, height) {
                Ok(g) => Some(g),
                Err(e) => return fail(EvtStatus::InvalidArgument, e),
            }
        };
        let data = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(bytes, len)
        };
        match decode(data, format, geometry) {
            Ok(s) => put_stream(out, s),
            Err(CodecError::Stream(e @ StreamError::OutOfBounds { .. })) => fail(EvtStatus::OutOfBounds, e),
            Err(e) => fail(EvtStatus::Decode, e),
        }
    })
}

/// Encodes a stream into a buffer owned by this library; release it with
/// [`evt_bytes_free`]. An empty encoding yields a NULL buffer and length 0.
#[no_mangle]
pub unsafe extern "C" fn evt_encode(
    stream: *const EvtStream,
    format: u32,
    out_bytes: *mut *mut u8,
    out_len: *mut usize,
) -> EvtStatus {
    guard(|| {
        let Some(s) = stream.as_ref() else {
            return fail(EvtStatus::NullPointer, "null stream");
        };
        if out_bytes.is_null() || out_len.is_null() {
            return fail(EvtStatus::NullPointer, "null output pointer");
        }
        let Some(format) = format_from(format) else {
            return fail(EvtStatus::InvalidArgument, format!("unknown format code {format}"));
        };
        match encode(&s.0, format) {
            Ok(bytes) => {
                *out_len = bytes.len();
                *out_bytes = if bytes.is_empty() {
                    ptr::null_mut()
                } else {
                    Box::into_raw(bytes.into_boxed_slice()).cast()
                };
                EvtStatus::Ok
            }
            Err(e) => fail(EvtStatus::Encode, e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn evt_bytes_free(bytes: *mut u8, len: usize) {
    if !bytes.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(bytes, len)));
    }
}

#[no_mangle]
pub unsafe extern "C" fn evt_normalize_time(stream: *const EvtStream, out: *mut *mut EvtStream) -> EvtStatus {
    guard(|| {
        let (Some(s), false) = (stream.as_ref(), out.is_null()) else {
            return fail(EvtStatus::NullPointer, "null pointer argument");
        };
        match normalize_time(&s.0) {
            Ok(n) => put_stream(out, n),
            Err(e) => fail(EvtStatus::InvalidArgument, e),
        }
    })
}

/// `(t_max - t_min) / max(width, height)`.
#[no_mangle]
pub unsafe extern "C" fn evt_default_tau(stream: *const EvtStream, out: *mut f64) -> EvtStatus {
    let (Some(s), false) = (stream.as_ref(), out.is_null()) else {
        return fail(EvtStatus::NullPointer, "null pointer argument");
    };
    match default_tau(&s.0) {
        Ok(tau) => {
            *out = tau;
            EvtStatus::Ok
        }
        Err(e) => fail(EvtStatus::Transform, e),
    }
}

/// Writes the 4x4 VPT matrix row-major into `out[16]`.
#[no_mangle]
pub unsafe extern "C" fn evt_vpt_matrix(
    plane: u32,
    theta: f64,
    tau: f64,
    center_spatial: f64,
    center_time: f64,
    out: *mut f64,
) -> EvtStatus {
    if out.is_null() {
        return fail(EvtStatus::NullPointer, "null output buffer");
    }
    let Some(plane) = plane_from(plane) else {
        return fail(EvtStatus::InvalidArgument, format!("unknown plane code {plane}"));
    };
    let m = VptParams::new(plane, theta, tau, center_spatial, center_time).and_then(|p| vpt_matrix(&p));
    match m {
        Ok(m) => {
            let dst = std::slice::from_raw_parts_mut(out, 16);
            for (i, row) in m.0.iter().enumerate() {
                dst[i * 4..i * 4 + 4].copy_from_slice(row);
            }
            EvtStatus::Ok
        }
        Err(e) => fail(EvtStatus::Transform, e),
    }
}

/// Viewpoint transformation. `stats` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn evt_apply_vpt(
    stream: *const EvtStream,
    plane: u32,
    theta: f64,
    tau: f64,
    center_spatial: f64,
    center_time: f64,
    out: *mut *mut EvtStream,
    stats: *mut EvtTransformStats,
) -> EvtStatus {
    guard(|| {
        let (Some(s), false) = (stream.as_ref(), out.is_null()) else {
            return fail(EvtStatus::NullPointer, "null pointer argument");
        };
        let Some(plane) = plane_from(plane) else {
            return fail(EvtStatus::InvalidArgument, format!("unknown plane code {plane}"));
        };
        let result = VptParams::new(plane, theta, tau, center_spatial, center_time).and_then(|p| apply_vpt(&s.0, &p));
        match result {
            Ok((o, st)) => {
                if let Some(dst) = stats.as_mut() {
                    *dst = st.into();
                }
                put_stream(out, o)
            }
            Err(e) => fail(EvtStatus::Transform, e),
        }
    })
}

/// Spatiotemporal stretch; never discards events.
#[no_mangle]
pub unsafe extern "C" fn evt_apply_sts(
    stream: *const EvtStream,
    plane: u32,
    theta: f64,
    tau: f64,
    center_spatial: f64,
    out: *mut *mut EvtStream,
) -> EvtStatus {
    guard(|| {
        let (Some(s), false) = (stream.as_ref(), out.is_null()) else {
            return fail(EvtStatus::NullPointer, "null pointer argument");
        };
        let Some(plane) = plane_from(plane) else {
            return fail(EvtStatus::InvalidArgument, format!("unknown plane code {plane}"));
        };
        match StsParams::new(plane, theta, tau, center_spatial).and_then(|p| apply_sts(&s.0, &p)) {
            Ok(o) => put_stream(out, o),
            Err(e) => fail(EvtStatus::Transform, e),
        }
    })
}

/// Image-plane rotation about `(center_y, center_x)`. `stats` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn evt_apply_rotation(
    stream: *const EvtStream,
    theta: f64,
    center_y: f64,
    center_x: f64,
    out: *mut *mut EvtStream,
    stats: *mut EvtTransformStats,
) -> EvtStatus {
    guard(|| {
        let (Some(s), false) = (stream.as_ref(), out.is_null()) else {
            return fail(EvtStatus::NullPointer, "null pointer argument");
        };
        let p = RotationParams {
            theta,
            center_y,
            center_x,
        };
        match apply_spatial_rotation(&s.0, &p) {
            Ok((o, st)) => {
                if let Some(dst) = stats.as_mut() {
                    *dst = st.into();
                }
                put_stream(out, o)
            }
            Err(e) => fail(EvtStatus::Transform, e),
        }
    })
}

/// Rasterizes a stream. `bins` is used only for voxel grids.
#[no_mangle]
pub unsafe extern "C" fn evt_rasterize(
    stream: *const EvtStream,
    kind: u32,
    bins: usize,
    out: *mut *mut EvtRaster,
) -> EvtStatus {
    guard(|| {
        let (Some(s), false) = (stream.as_ref(), out.is_null()) else {
            return fail(EvtStatus::NullPointer, "null pointer argument");
        };
        let Some(kind) = raster_kind_from(kind) else {
            return fail(EvtStatus::InvalidArgument, format!("unknown raster kind {kind}"));
        };
        match rasterize(&s.0, kind, bins) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(EvtRaster(r)));
                EvtStatus::Ok
            }
            Err(e) => fail(EvtStatus::Raster, e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn evt_raster_free(raster: *mut EvtRaster) {
    if !raster.is_null() {
        drop(Box::from_raw(raster));
    }
}

#[no_mangle]
pub unsafe extern "C" fn evt_raster_dims(
    raster: *const EvtRaster,
    channels: *mut usize,
    height: *mut usize,
    width: *mut usize,
) -> EvtStatus {
    let (Some(r), false, false, false) = (raster.as_ref(), channels.is_null(), height.is_null(), width.is_null())
    else {
        return fail(EvtStatus::NullPointer, "null pointer argument");
    };
    *channels = r.0.channels;
    *height = r.0.height;
    *width = r.0.width;
    EvtStatus::Ok
}

/// Borrowed pointer to `channels * height * width` values, valid until the
/// raster is freed. NULL for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn evt_raster_data(raster: *const EvtRaster) -> *const f64 {
    raster.as_ref().map_or(ptr::null(), |r| r.0.values.as_ptr())
}

#[no_mangle]
pub unsafe extern "C" fn evt_raster_distance(a: *const EvtRaster, b: *const EvtRaster, out: *mut f64) -> EvtStatus {
    let (Some(a), Some(b), false) = (a.as_ref(), b.as_ref(), out.is_null()) else {
        return fail(EvtStatus::NullPointer, "null pointer argument");
    };
    match raster_distance(&a.0, &b.0) {
        Ok(d) => {
            *out = d;
            EvtStatus::Ok
        }
        Err(e) => fail(EvtStatus::Raster, e),
    }
}
