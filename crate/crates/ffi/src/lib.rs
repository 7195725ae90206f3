//! C interface to `parkjam`.
//!
//! Every fallible function returns a [`PjStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can
//! be read with [`pj_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use parkjam::armour::{sample_window, sample_x};
use parkjam::estimators::{estimate_density, Mode};
use parkjam::parking::jam_box;
use parkjam::{bounds, exact1d, BoxRegion, Error, Seed, Site, UniformField};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PjStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad dimension, mismatched site, out-of-range parameter.
    InvalidArgument = 2,
    /// The armour search left the cap box. Retry with a larger cap.
    ArmourOverflow = 3,
    BufferTooSmall = 4,
    Runtime = 5,
    Panic = 6,
}

pub const PJ_MODE_THERMODYNAMIC: u32 = 0;
pub const PJ_MODE_FREE_BOUNDARY: u32 = 1;

/// Opaque handle to a random field.
pub struct PjField {
    inner: UniformField,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PjStatus {
    match e.root() {
        Error::ArmourOverflow { .. } => PjStatus::ArmourOverflow,
        _ if e.is_usage() => PjStatus::InvalidArgument,
        _ => PjStatus::Runtime,
    }
}

/// Runs `f`, records any error or panic, and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), (PjStatus, String)>) -> PjStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PjStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PjStatus::Panic
        }
    }
}

type Fail = (PjStatus, String);

trait OrFail<T> {
    fn or_fail(self) -> Result<T, Fail>;
}

impl<T> OrFail<T> for parkjam::Result<T> {
    fn or_fail(self) -> Result<T, Fail> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(name: &str) -> Fail {
    (PjStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn deref<'a>(f: *const PjField) -> Result<&'a UniformField, Fail> {
    f.as_ref().map(|f| &f.inner).ok_or_else(|| null("field"))
}

unsafe fn site(coords: *const i32, len: usize) -> Result<Site, Fail> {
    if coords.is_null() {
        return Err(null("coords"));
    }
    Site::new(std::slice::from_raw_parts(coords, len)).or_fail()
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next `pj_` call on the same thread.
#[no_mangle]
pub extern "C" fn pj_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pj_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a field of dimension `dim` (1 to 4). Free it with `pj_field_free`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pj_field_new(seed: u64, dim: u32, out: *mut *mut PjField) -> PjStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = UniformField::new(Seed(seed), dim as usize).or_fail()?;
        out.write(Box::into_raw(Box::new(PjField { inner })));
        Ok(())
    })
}

/// # Safety
/// `field` must come from `pj_field_new` and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn pj_field_free(field: *mut PjField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Dimension of the field, or 0 for NULL.
///
/// # Safety
/// `field` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pj_field_dim(field: *const PjField) -> u32 {
    field.as_ref().map_or(0, |f| f.inner.dim() as u32)
}

/// Mark U(i) at the site with `len` coordinates.
///
/// # Safety
/// `coords` must point to `len` integers; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pj_uniform_at(
    field: *const PjField,
    coords: *const i32,
    len: usize,
    out: *mut f64,
) -> PjStatus {
    guard(|| {
        let u = deref(field)?.uniform_at(&site(coords, len)?).or_fail()?;
        write(out, u, "out")
    })
}

/// Whether site `a` is visited before site `b`.
///
/// # Safety
/// `a` and `b` must point to `len` integers; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pj_rank_less(
    field: *const PjField,
    a: *const i32,
    b: *const i32,
    len: usize,
    out: *mut bool,
) -> PjStatus {
    guard(|| {
        let less = deref(field)?.rank_less(&site(a, len)?, &site(b, len)?).or_fail()?;
        write(out, less, "out")
    })
}

/// Occupancy of one site in the jammed infinite-volume configuration.
///
/// # Safety
/// `coords` must point to `len` integers; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pj_sample_x(
    field: *const PjField,
    coords: *const i32,
    len: usize,
    cap: u32,
    out: *mut u8,
) -> PjStatus {
    guard(|| {
        let x = sample_x(deref(field)?, &site(coords, len)?, cap).or_fail()?;
        write(out, x, "out")
    })
}

/// Number of sites in a box of the given radius, `(2 radius + 1)^dim`.
#[no_mangle]
pub extern "C" fn pj_box_len(dim: u32, radius: u32) -> u64 {
    (2 * radius as u64 + 1).saturating_pow(dim)
}

/// Infinite-volume occupancy on the box of `radius` around `center`.
/// Sites are written in row-major order, last coordinate fastest.
/// `out_len` must be at least `pj_box_len`; otherwise nothing is written.
///
/// # Safety
/// `center` must point to `len` integers; `out` must be valid for `out_len` bytes.
#[no_mangle]
pub unsafe extern "C" fn pj_sample_window(
    field: *const PjField,
    center: *const i32,
    len: usize,
    radius: u32,
    cap: u32,
    out: *mut u8,
    out_len: usize,
) -> PjStatus {
    guard(|| {
        let f = deref(field)?;
        let b = BoxRegion::new(site(center, len)?, radius);
        if out.is_null() {
            return Err(null("out"));
        }
        if (out_len as u64) < b.len() {
            return Err((
                PjStatus::BufferTooSmall,
                format!("buffer holds {out_len} sites, box has {}", b.len()),
            ));
        }
        let c = sample_window(f, &b, cap).or_fail()?;
        let dst = std::slice::from_raw_parts_mut(out, b.len() as usize);
        for (slot, s) in dst.iter_mut().zip(b.sites()) {
            *slot = c.value(&s);
        }
        Ok(())
    })
}

/// Occupied count of the free-boundary jam of the origin-centred box.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pj_jam_box_count(field: *const PjField, radius: u32, out: *mut u64) -> PjStatus {
    guard(|| {
        let f = deref(field)?;
        let b = BoxRegion::centered(f.dim(), radius).or_fail()?;
        let n = jam_box(f, &b).or_fail()?.count_occupied();
        write(out, n, "out")
    })
}

/// Jamming density of the line, computed exactly.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pj_exact_rho(out: *mut f64) -> PjStatus {
    guard(|| write(out, exact1d::exact_rho().or_fail()?, "out"))
}

/// The armour-tail constant B for dimension `d`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pj_constant_b(d: u32, out: *mut f64) -> PjStatus {
    guard(|| write(out, bounds::constant_B(d).or_fail()?, "out"))
}

/// Upper bound on P(|N_n - E N_n| > eps) in the thermodynamic setting.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pj_concentration_bound(d: u32, n: u32, eps: f64, out: *mut f64) -> PjStatus {
    guard(|| write(out, bounds::concentration_bound(d, n, eps).or_fail()?, "out"))
}

/// Same bound for the free-boundary line.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pj_concentration_bound_free(n: u32, eps: f64, out: *mut f64) -> PjStatus {
    guard(|| write(out, bounds::concentration_bound_free(n, eps).or_fail()?, "out"))
}

/// Bound on P(|N - N̄| > m) for the boundary coupling on the line.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pj_coupling_bound(m: f64, out: *mut f64) -> PjStatus {
    guard(|| write(out, bounds::coupling_bound(m).or_fail()?, "out"))
}

/// Bound on |E N_n - rho |Λ_n||.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pj_mean_dev_bound(d: u32, n: u32, out: *mut f64) -> PjStatus {
    guard(|| write(out, bounds::mean_dev_bound(d, n).or_fail()?, "out"))
}

/// Monte Carlo density on the radius-`n` box with replicate seeds
/// `seed, seed + 1, ...`. Uses rayon's global pool.
///
/// # Safety
/// `mean` and `stderr` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pj_estimate_density(
    d: u32,
    n: u32,
    replicates: u64,
    seed: u64,
    mode: u32,
    cap: u32,
    mean: *mut f64,
    stderr: *mut f64,
) -> PjStatus {
    guard(|| {
        if mean.is_null() || stderr.is_null() {
            return Err(null("mean/stderr"));
        }
        let mode = match mode {
            PJ_MODE_THERMODYNAMIC => Mode::Thermodynamic,
            PJ_MODE_FREE_BOUNDARY => Mode::FreeBoundary,
            m => return Err((PjStatus::InvalidArgument, format!("unknown mode {m}"))),
        };
        let e = estimate_density(d as usize, n, replicates, Seed(seed), mode, cap).or_fail()?;
        write(mean, e.mean, "mean")?;
        write(stderr, e.stderr, "stderr")
    })
}
