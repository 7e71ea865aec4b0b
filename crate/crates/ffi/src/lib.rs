//! C ABI over `systole-core`. Surfaces are opaque handles; every call returns a
//! status code, and the message of the last failure on the calling thread is
//! available through `systole_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Duration;

use systole_core::filling::{max_minimal_filling, min_filling, SearchOptions};
use systole_core::homology::{build_combinatorial_map, homology_span_rank};
use systole_core::hyperbolic::{critical_point, one_region_set, IndexOptions};
use systole_core::{build_surface, Bits, Error, SurfaceModel, SurfaceParams};

/// Status codes returned by every function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystoleStatus {
    Ok = 0,
    NullPointer = 1,
    NotHyperbolic = 2,
    TooLarge = 3,
    BadArgument = 4,
    Invariant = 5,
    Timeout = 6,
    Numerical = 7,
    IndeterminateRank = 8,
    BufferTooSmall = 9,
    Internal = 10,
}

/// Which filling problem to solve.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystoleFillingKind {
    Min = 0,
    Max = 1,
}

/// Opaque surface handle.
pub struct SystoleSurface {
    model: SurfaceModel,
}

/// Result of the index computation.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SystoleIndex {
    pub index: usize,
    pub parameters: usize,
    pub spectral_gap: f64,
    pub holonomy_defect: f64,
    pub eutactic: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> SystoleStatus {
    match e {
        Error::NotHyperbolic(_) => SystoleStatus::NotHyperbolic,
        Error::TooLarge(..) => SystoleStatus::TooLarge,
        Error::BadLabel(_) => SystoleStatus::BadArgument,
        Error::Invariant(_) => SystoleStatus::Invariant,
        Error::Timeout(_) => SystoleStatus::Timeout,
        Error::Numerical(_) => SystoleStatus::Numerical,
        Error::IndeterminateRank(_) => SystoleStatus::IndeterminateRank,
        _ => SystoleStatus::Internal,
    }
}

/// Runs `f`, recording errors and turning panics into `Internal`.
fn guard(f: impl FnOnce() -> Result<(), (SystoleStatus, String)>) -> SystoleStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SystoleStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".to_string());
            SystoleStatus::Internal
        }
    }
}

fn core(e: Error) -> (SystoleStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (SystoleStatus, String) {
    (SystoleStatus::NullPointer, format!("{} is null", what))
}

unsafe fn surface<'a>(s: *const SystoleSurface) -> Result<&'a SurfaceModel, (SystoleStatus, String)> {
    s.as_ref().map(|s| &s.model).ok_or_else(|| null("surface"))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn systole_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Builds the surface for parameter `m` and stores a new handle in `out`.
///
/// # Safety
/// `out` must be a valid pointer; free the handle with `systole_surface_free`.
#[no_mangle]
pub unsafe extern "C" fn systole_surface_new(m: usize, out: *mut *mut SystoleSurface) -> SystoleStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let model = SurfaceParams::new(m).and_then(build_surface).map_err(core)?;
        *out = Box::into_raw(Box::new(SystoleSurface { model }));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle from `systole_surface_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn systole_surface_free(s: *mut SystoleSurface) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live handle and `genus`, `systoles` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn systole_surface_info(
    s: *const SystoleSurface,
    genus: *mut usize,
    systoles: *mut usize,
) -> SystoleStatus {
    guard(|| {
        let model = surface(s)?;
        if genus.is_null() || systoles.is_null() {
            return Err(null("output"));
        }
        *genus = model.genus;
        *systoles = model.n();
        Ok(())
    })
}

/// Whether systoles `i` and `j` intersect.
///
/// # Safety
/// `s` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn systole_surface_intersects(
    s: *const SystoleSurface,
    i: usize,
    j: usize,
    out: *mut bool,
) -> SystoleStatus {
    guard(|| {
        let model = surface(s)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if i >= model.n() || j >= model.n() {
            return Err((SystoleStatus::BadArgument, format!("systole index out of range 0..{}", model.n())));
        }
        *out = model.intersects(i, j);
        Ok(())
    })
}

/// Smallest or largest minimal filling set. Systole indices are written to
/// `ids` (capacity `cap`), their count to `len`. With a too-small buffer the
/// call returns `BUFFER_TOO_SMALL` and still sets `len`. `time_limit_seconds`
/// of zero or less means no limit.
///
/// # Safety
/// `s` must be a live handle; `ids` must hold `cap` entries; `len` and
/// `proved_optimal` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn systole_filling(
    s: *const SystoleSurface,
    kind: SystoleFillingKind,
    time_limit_seconds: f64,
    threads: usize,
    ids: *mut usize,
    cap: usize,
    len: *mut usize,
    proved_optimal: *mut bool,
) -> SystoleStatus {
    guard(|| {
        let model = surface(s)?;
        if len.is_null() || proved_optimal.is_null() || (ids.is_null() && cap > 0) {
            return Err(null("output"));
        }
        let opts = SearchOptions {
            time_limit: (time_limit_seconds > 0.0).then(|| Duration::from_secs_f64(time_limit_seconds)),
            threads: threads.max(1),
            ..SearchOptions::default()
        };
        let res = match kind {
            SystoleFillingKind::Min => min_filling(model, &opts),
            SystoleFillingKind::Max => max_minimal_filling(model, &opts),
        }
        .map_err(core)?;
        *len = res.set.len();
        *proved_optimal = res.proved_optimal;
        if cap < res.set.len() {
            return Err((SystoleStatus::BufferTooSmall, format!("need {} entries", res.set.len())));
        }
        for (k, c) in res.set.iter().enumerate() {
            *ids.add(k) = c;
        }
        Ok(())
    })
}

/// Rank of the span of the given systoles in rational homology.
///
/// # Safety
/// `s` must be a live handle, `ids` must hold `len` entries, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn systole_homology_rank(
    s: *const SystoleSurface,
    ids: *const usize,
    len: usize,
    out: *mut usize,
) -> SystoleStatus {
    guard(|| {
        let model = surface(s)?;
        if out.is_null() || (ids.is_null() && len > 0) {
            return Err(null("argument"));
        }
        let ids = if len == 0 { &[][..] } else { std::slice::from_raw_parts(ids, len) };
        if let Some(&bad) = ids.iter().find(|&&c| c >= model.n()) {
            return Err((SystoleStatus::BadArgument, format!("systole index {} out of range", bad)));
        }
        let set: Bits = ids.iter().copied().collect();
        *out = homology_span_rank(model, &set).map_err(core)?;
        Ok(())
    })
}

/// Morse index of the systole function at the critical point, with default
/// numerical settings.
///
/// # Safety
/// `s` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn systole_index(s: *const SystoleSurface, out: *mut SystoleIndex) -> SystoleStatus {
    guard(|| {
        let model = surface(s)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let min = min_filling(model, &SearchOptions::default()).map_err(core)?;
        let set = one_region_set(model, &min.classes).map_err(core)?;
        let map = build_combinatorial_map(model).map_err(core)?;
        let p = critical_point(model, &map, &set, &IndexOptions::default()).map_err(core)?;
        *out = SystoleIndex {
            index: p.report.index,
            parameters: p.chart.dimension(),
            spectral_gap: p.report.gap,
            holonomy_defect: p.defect,
            eutactic: p.eutactic,
        };
        Ok(())
    })
}
