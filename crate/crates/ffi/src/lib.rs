//! C ABI over `horofill`.
//!
//! Objects are opaque heap handles released with their `hf_*_free` function. Every call
//! returns an [`HfStatus`]; on failure `hf_last_error` gives a message for the calling
//! thread. Panics are caught at the boundary and reported as `HF_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::Arc;

use horofill::bootstrap::{bootstrap, exponent_step};
use horofill::coxeter::{RootSystem, RootSystemSpec, Slope};
use horofill::fan::{fill_tube_loop, wobble_loop};
use horofill::filling::{cone_fill, fill_flat_loop};
use horofill::linalg::Vector;
use horofill::partition::{validate_partition, FillingPartition, Host, Loop};
use horofill::trace::{BusemannTrace, TraceFile};
use horofill::tube::ConvexPolytope;
use horofill::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Hypothesis = 4,
    MeshNotReached = 5,
    Partition = 6,
    Io = 7,
    Config = 8,
    Panic = 9,
    Other = 10,
}

pub struct HfRootSystem(Arc<RootSystem>);
pub struct HfTrace(Arc<BusemannTrace>);
pub struct HfPolytope(Arc<ConvexPolytope>);
pub struct HfLoop(Loop);
pub struct HfPartition(FillingPartition);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HfStatus {
    match e {
        Error::Dimension { .. } => HfStatus::Dimension,
        Error::NotUnit(_)
        | Error::NotInChamber { .. }
        | Error::InvalidMesh(_)
        | Error::InvalidLoop(_)
        | Error::InvalidTrace(_)
        | Error::InvalidPolytope(_)
        | Error::OutOfRange(_)
        | Error::OffTube(_)
        | Error::UnsupportedRootSystem(_) => HfStatus::InvalidArgument,
        Error::Hypothesis(_) | Error::StripFails | Error::BelowLevel { .. } | Error::UnboundedBelow | Error::Inclusion { .. } => {
            HfStatus::Hypothesis
        }
        Error::MeshNotReached { .. } => HfStatus::MeshNotReached,
        Error::Partition(_) | Error::WildBricks { .. } => HfStatus::Partition,
        Error::Io(_) => HfStatus::Io,
        Error::Config(_) => HfStatus::Config,
        _ => HfStatus::Other,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (HfStatus, String)>) -> HfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HfStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside horofill".into());
            HfStatus::Panic
        }
    }
}

trait Lift<T> {
    fn lift(self) -> Result<T, (HfStatus, String)>;
}

impl<T> Lift<T> for horofill::Result<T> {
    fn lift(self) -> Result<T, (HfStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (HfStatus, String) {
    (HfStatus::NullPointer, format!("{what} is null"))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (HfStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (HfStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn doubles<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], (HfStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, n))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (HfStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (HfStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn points(coords: &[f64], count: usize, dim: usize) -> Result<Vec<Vector>, (HfStatus, String)> {
    if dim == 0 || coords.len() != count * dim {
        return Err((HfStatus::InvalidArgument, format!("expected {count} x {dim} coordinates")));
    }
    Ok(coords.chunks(dim).map(Vector::from_column_slice).collect())
}

fn boxed<T>(out: &mut *mut T, v: T) {
    *out = Box::into_raw(Box::new(v));
}

/// Message of the last failed call on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn hf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn hf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Root system from a JSON descriptor such as `{"family": "a", "rank": 3}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hf_root_system_from_json(json: *const c_char, out: *mut *mut HfRootSystem) -> HfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let spec: RootSystemSpec = serde_json::from_str(text(json, "json")?).map_err(|e| (HfStatus::Config, e.to_string()))?;
        let rs = RootSystem::new(spec).lift()?;
        boxed(out, HfRootSystem(Arc::new(rs)));
        Ok(())
    })
}

/// # Safety
/// `rs` must be a live handle or null; `order` and `rank` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hf_root_system_info(rs: *const HfRootSystem, order: *mut usize, rank: *mut usize) -> HfStatus {
    guard(|| {
        let rs = handle(rs, "rs")?;
        *out_ptr(order, "order")? = rs.0.order();
        *out_ptr(rank, "rank")? = rs.0.rank();
        Ok(())
    })
}

/// # Safety
/// `rs` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hf_root_system_free(rs: *mut HfRootSystem) {
    if !rs.is_null() {
        drop(Box::from_raw(rs));
    }
}

/// Trace with every orbit gradient of `-theta` and one common offset; `theta` is normalised.
///
/// # Safety
/// `theta` must hold `dim` doubles; `rs` a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hf_trace_symmetric(
    rs: *const HfRootSystem,
    theta: *const f64,
    dim: usize,
    offset: f64,
    out: *mut *mut HfTrace,
) -> HfStatus {
    guard(|| {
        let rs = handle(rs, "rs")?;
        let out = out_ptr(out, "out")?;
        let th = Slope::from_direction(&rs.0, &Vector::from_column_slice(doubles(theta, dim, "theta")?)).lift()?;
        let tr = BusemannTrace::symmetric(rs.0.clone(), th, offset).lift()?;
        boxed(out, HfTrace(Arc::new(tr)));
        Ok(())
    })
}

/// Trace from its JSON file format.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hf_trace_from_json(json: *const c_char, out: *mut *mut HfTrace) -> HfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let file: TraceFile = serde_json::from_str(text(json, "json")?).map_err(|e| (HfStatus::Config, e.to_string()))?;
        let tr = BusemannTrace::from_file(&file).lift()?;
        boxed(out, HfTrace(Arc::new(tr)));
        Ok(())
    })
}

/// # Safety
/// `x` must hold `dim` doubles; `trace` a live handle; `value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hf_trace_value(trace: *const HfTrace, x: *const f64, dim: usize, value: *mut f64) -> HfStatus {
    guard(|| {
        let tr = handle(trace, "trace")?;
        if dim != tr.0.dim() {
            return Err((HfStatus::Dimension, format!("expected dimension {}, got {dim}", tr.0.dim())));
        }
        *out_ptr(value, "value")? = tr.0.value(&Vector::from_column_slice(doubles(x, dim, "x")?));
        Ok(())
    })
}

/// # Safety
/// `trace` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hf_trace_free(trace: *mut HfTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Convex hull of `count` points of dimension `dim` (row-major); must not be full-dimensional.
///
/// # Safety
/// `coords` must hold `count * dim` doubles; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hf_polytope_from_vertices(coords: *const f64, count: usize, dim: usize, out: *mut *mut HfPolytope) -> HfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let pts = points(doubles(coords, count * dim, "coords")?, count, dim)?;
        let p = ConvexPolytope::from_vertices(pts).lift()?;
        boxed(out, HfPolytope(Arc::new(p)));
        Ok(())
    })
}

/// # Safety
/// `p` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hf_polytope_free(p: *mut HfPolytope) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Closed polygon in `E^dim` from `count` row-major points.
///
/// # Safety
/// `coords` must hold `count * dim` doubles; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hf_loop_flat(coords: *const f64, count: usize, dim: usize, out: *mut *mut HfLoop) -> HfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let pts = points(doubles(coords, count * dim, "coords")?, count, dim)?;
        boxed(out, HfLoop(Loop::flat(pts).lift()?));
        Ok(())
    })
}

/// Closed polygon on the tube `∂N_radius(p)`.
///
/// # Safety
/// `coords` must hold `count * dim` doubles; `p` a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hf_loop_on_tube(
    p: *const HfPolytope,
    radius: f64,
    coords: *const f64,
    count: usize,
    dim: usize,
    out: *mut *mut HfLoop,
) -> HfStatus {
    guard(|| {
        let p = handle(p, "p")?;
        let out = out_ptr(out, "out")?;
        let pts = points(doubles(coords, count * dim, "coords")?, count, dim)?;
        boxed(out, HfLoop(Loop::new(pts, Host::Tube { polytope: p.0.clone(), radius }).lift()?));
        Ok(())
    })
}

/// Wobbling loop of the given length on `∂N_radius(p)` around `axis`.
///
/// # Safety
/// `axis` must hold `dim` doubles; `p` a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hf_wobble_loop(
    p: *const HfPolytope,
    radius: f64,
    axis: *const f64,
    dim: usize,
    length: f64,
    spacing: f64,
    out: *mut *mut HfLoop,
) -> HfStatus {
    guard(|| {
        let p = handle(p, "p")?;
        let out = out_ptr(out, "out")?;
        let axis = Vector::from_column_slice(doubles(axis, dim, "axis")?);
        boxed(out, HfLoop(wobble_loop(&p.0, radius, &axis, length, spacing).lift()?));
        Ok(())
    })
}

/// # Safety
/// `lp` must be a live handle; the out pointers valid.
#[no_mangle]
pub unsafe extern "C" fn hf_loop_info(lp: *const HfLoop, vertices: *mut usize, length: *mut f64) -> HfStatus {
    guard(|| {
        let lp = handle(lp, "loop")?;
        *out_ptr(vertices, "vertices")? = lp.0.len();
        *out_ptr(length, "length")? = lp.0.length();
        Ok(())
    })
}

/// # Safety
/// `lp` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hf_loop_free(lp: *mut HfLoop) {
    if !lp.is_null() {
        drop(Box::from_raw(lp));
    }
}

/// Cone fill of a flat loop with bricks of perimeter at most `mesh`.
///
/// # Safety
/// `lp` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hf_cone_fill(lp: *const HfLoop, mesh: f64, out: *mut *mut HfPartition) -> HfStatus {
    guard(|| {
        let lp = handle(lp, "loop")?;
        let out = out_ptr(out, "out")?;
        boxed(out, HfPartition(cone_fill(&lp.0, mesh).lift()?));
        Ok(())
    })
}

/// Fill of a flat loop lying outside the open sublevel set `{trace < 0}`.
///
/// # Safety
/// `trace` and `lp` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hf_fill_flat_loop(trace: *const HfTrace, lp: *const HfLoop, mesh: f64, out: *mut *mut HfPartition) -> HfStatus {
    guard(|| {
        let tr = handle(trace, "trace")?;
        let lp = handle(lp, "loop")?;
        let out = out_ptr(out, "out")?;
        boxed(out, HfPartition(fill_flat_loop(&tr.0, &lp.0, mesh).lift()?.partition));
        Ok(())
    })
}

/// Fill of a loop on `∂N_radius(p)`.
///
/// # Safety
/// `p` and `lp` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hf_fill_tube_loop(
    p: *const HfPolytope,
    radius: f64,
    lp: *const HfLoop,
    mesh: f64,
    out: *mut *mut HfPartition,
) -> HfStatus {
    guard(|| {
        let p = handle(p, "p")?;
        let lp = handle(lp, "loop")?;
        let out = out_ptr(out, "out")?;
        boxed(out, HfPartition(fill_tube_loop(&p.0, radius, &lp.0, mesh).lift()?.partition));
        Ok(())
    })
}

/// Area, mesh and brick census of a partition.
///
/// # Safety
/// `fp` must be a live handle; every out pointer valid.
#[no_mangle]
pub unsafe extern "C" fn hf_partition_info(
    fp: *const HfPartition,
    area: *mut usize,
    mesh: *mut f64,
    flat_bricks: *mut usize,
    wild_bricks: *mut usize,
) -> HfStatus {
    guard(|| {
        let fp = handle(fp, "partition")?;
        *out_ptr(area, "area")? = fp.0.area;
        *out_ptr(mesh, "mesh")? = fp.0.mesh;
        *out_ptr(flat_bricks, "flat_bricks")? = fp.0.census.flat_bricks;
        *out_ptr(wild_bricks, "wild_bricks")? = fp.0.census.wild_bricks;
        Ok(())
    })
}

/// Copy triangle vertex indices (3 per triangle) into `buf`. With `buf` null only `needed`
/// is written.
///
/// # Safety
/// `fp` must be a live handle; `buf` must hold `cap` entries when non-null.
#[no_mangle]
pub unsafe extern "C" fn hf_partition_triangles(fp: *const HfPartition, buf: *mut usize, cap: usize, needed: *mut usize) -> HfStatus {
    guard(|| {
        let fp = handle(fp, "partition")?;
        let n = fp.0.triangles.len() * 3;
        *out_ptr(needed, "needed")? = n;
        if buf.is_null() {
            return Ok(());
        }
        if cap < n {
            return Err((HfStatus::InvalidArgument, format!("buffer holds {cap}, need {n}")));
        }
        let dst = slice::from_raw_parts_mut(buf, n);
        for (k, t) in fp.0.triangles.iter().enumerate() {
            dst[3 * k..3 * k + 3].copy_from_slice(t);
        }
        Ok(())
    })
}

/// Re-check a partition against a loop from scratch.
///
/// # Safety
/// `lp` and `fp` must be live handles; out pointers valid.
#[no_mangle]
pub unsafe extern "C" fn hf_validate_partition(lp: *const HfLoop, fp: *const HfPartition, mesh: *mut f64, area: *mut usize) -> HfStatus {
    guard(|| {
        let lp = handle(lp, "loop")?;
        let fp = handle(fp, "partition")?;
        let (m, a) = validate_partition(&lp.0, &fp.0).lift()?;
        *out_ptr(mesh, "mesh")? = m;
        *out_ptr(area, "area")? = a;
        Ok(())
    })
}

/// # Safety
/// `fp` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hf_partition_free(fp: *mut HfPartition) {
    if !fp.is_null() {
        drop(Box::from_raw(fp));
    }
}

/// `eps - eps^2 / 2` for `eps` in `[0, 1]`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hf_exponent_step(eps: f64, out: *mut f64) -> HfStatus {
    guard(|| {
        *out_ptr(out, "out")? = exponent_step(eps).lift()?;
        Ok(())
    })
}

/// Number of recurrence steps from `eps0` down to at most `tol`, and the final value.
///
/// # Safety
/// `steps` and `last` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hf_bootstrap(eps0: f64, tol: f64, steps: *mut usize, last: *mut f64) -> HfStatus {
    guard(|| {
        let steps = out_ptr(steps, "steps")?;
        let last = out_ptr(last, "last")?;
        let b = bootstrap(eps0, tol).lift()?;
        *steps = b.steps;
        *last = b.sequence.last().copied().unwrap_or(0.0);
        Ok(())
    })
}
