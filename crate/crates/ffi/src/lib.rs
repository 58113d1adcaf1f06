//! C ABI for the coverage kernel.
//!
//! Processes live behind an opaque [`SpbmProcess`] handle. Every function
//! returns an [`SpbmStatus`]; on failure the message is kept per thread and
//! can be copied out with [`spbm_last_error`]. Outputs are meaningful only
//! when the call returns `SPBM_STATUS_OK`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use spbm::coverage::{count_witnesses, coverage_threshold, is_covered};
use spbm::geom::MarkedPoint;
use spbm::model::{
    alpha, constant_c0, constant_cdky, sample_process, scaling_radius, theta, MarkedPointSet, RadiusLaw, RngStream,
    ScalingSchedule, ScheduleVariant,
};
use spbm::region::Aabb;
use spbm::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpbmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnsupportedDimension = 3,
    Uncoverable = 4,
    UnboundedLaw = 5,
    /// A Rust panic was caught at the boundary.
    Internal = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpbmVariant {
    HallJanson = 0,
    Corrected = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SpbmConstants {
    pub theta_d: f64,
    pub alpha: f64,
    pub c_dky: f64,
    pub c0: f64,
}

enum Inner {
    D2(MarkedPointSet<2>),
    D3(MarkedPointSet<3>),
}

/// Opaque marked point set in two or three dimensions.
pub struct SpbmProcess {
    inner: Inner,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> SpbmStatus {
    match e {
        Error::UnsupportedDimension(_) => SpbmStatus::UnsupportedDimension,
        Error::Uncoverable { .. } => SpbmStatus::Uncoverable,
        Error::UnboundedLaw => SpbmStatus::UnboundedLaw,
        _ => SpbmStatus::InvalidArgument,
    }
}

struct Fail(SpbmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SpbmStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SpbmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            SpbmStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SpbmStatus::Internal
        }
    }
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn law_from(spec: *const c_char) -> Result<RadiusLaw, Fail> {
    if spec.is_null() {
        return Err(null("law"));
    }
    let s = CStr::from_ptr(spec)
        .to_str()
        .map_err(|_| Fail(SpbmStatus::InvalidArgument, "law is not UTF-8".into()))?;
    Ok(s.parse::<RadiusLaw>()?)
}

unsafe fn process<'a>(p: *const SpbmProcess) -> Result<&'a SpbmProcess, Fail> {
    p.as_ref().ok_or_else(|| null("process"))
}

unsafe fn region<const D: usize>(lo: *const f64, hi: *const f64) -> Result<Aabb<D>, Fail> {
    Ok(Aabb::from_slices(slice(lo, D, "lo")?, slice(hi, D, "hi")?)?)
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

fn check_dim(dim: usize) -> Result<(), Fail> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim).into())
    }
}

/// Copies the last error message of this thread, NUL-terminated and
/// truncated to `capacity`, and returns its full length in bytes.
///
/// # Safety
/// `buf` must be null or point to `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn spbm_last_error(buf: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && capacity > 0 {
            let n = e.len().min(capacity - 1);
            std::ptr::copy_nonoverlapping(e.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        e.len()
    })
}

/// Builds a process from `n` centers (row-major, `dim` coordinates each)
/// and `n` positive marks.
///
/// # Safety
/// `centers` must hold `n * dim` values and `marks` `n` values; `out` must
/// be writable. The handle must be released with [`spbm_process_free`].
#[no_mangle]
pub unsafe extern "C" fn spbm_process_from_points(
    dim: usize,
    centers: *const f64,
    marks: *const f64,
    n: usize,
    out: *mut *mut SpbmProcess,
) -> SpbmStatus {
    guard(|| {
        check_dim(dim)?;
        let len = n.checked_mul(dim).ok_or_else(|| Fail(SpbmStatus::InvalidArgument, "n is too large".into()))?;
        let cs = slice(centers, len, "centers")?;
        let ms = slice(marks, n, "marks")?;
        fn build<const D: usize>(cs: &[f64], ms: &[f64]) -> Result<MarkedPointSet<D>, Error> {
            let pts = cs
                .chunks_exact(D)
                .zip(ms)
                .map(|(c, &m)| MarkedPoint::new(<[f64; D]>::try_from(c).expect("chunk of D"), m))
                .collect();
            MarkedPointSet::from_points(pts)
        }
        let inner = if dim == 2 { Inner::D2(build(cs, ms)?) } else { Inner::D3(build(cs, ms)?) };
        write(out, Box::into_raw(Box::new(SpbmProcess { inner })), "out")
    })
}

/// Samples the process of intensity `t` with marks from `law` (for example
/// `"det:1"` or `"unif:0.5:1.5"`) on the box `[lo, hi]` widened by
/// `r * sup(law)`.
///
/// # Safety
/// `lo` and `hi` must hold `dim` values, `law` must be a NUL-terminated
/// string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spbm_process_sample(
    dim: usize,
    lo: *const f64,
    hi: *const f64,
    t: f64,
    law: *const c_char,
    r: f64,
    seed: u64,
    stream: u64,
    out: *mut *mut SpbmProcess,
) -> SpbmStatus {
    guard(|| {
        check_dim(dim)?;
        let law = law_from(law)?;
        let s = RngStream::new(seed, stream);
        let inner = if dim == 2 {
            Inner::D2(sample_process(&region::<2>(lo, hi)?, t, &law, r, s, None)?)
        } else {
            Inner::D3(sample_process(&region::<3>(lo, hi)?, t, &law, r, s, None)?)
        };
        write(out, Box::into_raw(Box::new(SpbmProcess { inner })), "out")
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `p` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn spbm_process_free(p: *mut SpbmProcess) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live handle and `out_len`, `out_dim` writable.
#[no_mangle]
pub unsafe extern "C" fn spbm_process_len(p: *const SpbmProcess, out_len: *mut usize, out_dim: *mut usize) -> SpbmStatus {
    guard(|| {
        let (n, d) = match &process(p)?.inner {
            Inner::D2(s) => (s.len(), 2),
            Inner::D3(s) => (s.len(), 3),
        };
        write(out_len, n, "out_len")?;
        write(out_dim, d, "out_dim")
    })
}

/// Exact `k`-coverage of `[lo, hi]` by the closed balls of radius `r * mark`.
/// `out_reliable` is 0 when the verdict rests on near-tangent configurations.
///
/// # Safety
/// `p` must be a live handle, `lo`/`hi` hold the handle's dimension and the
/// outputs be writable.
#[no_mangle]
pub unsafe extern "C" fn spbm_is_covered(
    p: *const SpbmProcess,
    r: f64,
    lo: *const f64,
    hi: *const f64,
    k: usize,
    out_covered: *mut bool,
    out_reliable: *mut bool,
) -> SpbmStatus {
    guard(|| {
        let (c, rel) = match &process(p)?.inner {
            Inner::D2(s) => {
                let v = is_covered(s, r, &region::<2>(lo, hi)?, k)?;
                (v.covered, v.reliable)
            }
            Inner::D3(s) => {
                let v = is_covered(s, r, &region::<3>(lo, hi)?, k)?;
                (v.covered, v.reliable)
            }
        };
        write(out_covered, c, "out_covered")?;
        write(out_reliable, rel, "out_reliable")
    })
}

/// Coverage threshold of `[lo, hi]` to relative precision `tol_rel`.
///
/// # Safety
/// As [`spbm_is_covered`].
#[no_mangle]
pub unsafe extern "C" fn spbm_coverage_threshold(
    p: *const SpbmProcess,
    lo: *const f64,
    hi: *const f64,
    k: usize,
    tol_rel: f64,
    out: *mut f64,
) -> SpbmStatus {
    guard(|| {
        let v = match &process(p)?.inner {
            Inner::D2(s) => coverage_threshold(s, &region::<2>(lo, hi)?, k, tol_rel)?,
            Inner::D3(s) => coverage_threshold(s, &region::<3>(lo, hi)?, k, tol_rel)?,
        };
        write(out, v, "out")
    })
}

/// Number of interior local-minimum witnesses with fewer than `k` covering
/// balls in `[lo, hi]`, and the degenerate tuples skipped.
///
/// # Safety
/// As [`spbm_is_covered`].
#[no_mangle]
pub unsafe extern "C" fn spbm_count_witnesses(
    p: *const SpbmProcess,
    r: f64,
    lo: *const f64,
    hi: *const f64,
    k: usize,
    out_count: *mut usize,
    out_degenerate: *mut usize,
) -> SpbmStatus {
    guard(|| {
        let w = match &process(p)?.inner {
            Inner::D2(s) => {
                let w = count_witnesses(s, r, &region::<2>(lo, hi)?, k)?;
                (w.count, w.degenerate_events)
            }
            Inner::D3(s) => {
                let w = count_witnesses(s, r, &region::<3>(lo, hi)?, k)?;
                (w.count, w.degenerate_events)
            }
        };
        write(out_count, w.0, "out_count")?;
        write(out_degenerate, w.1, "out_degenerate")
    })
}

/// Model constants for dimension `d >= 2`, order `k >= 1` and a mark law.
///
/// # Safety
/// `law` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spbm_constants(d: usize, k: usize, law: *const c_char, out: *mut SpbmConstants) -> SpbmStatus {
    guard(|| {
        let law = law_from(law)?;
        ScalingSchedule::new(d, k, 0.0, ScheduleVariant::HallJanson)?;
        let c = SpbmConstants {
            theta_d: theta(d),
            alpha: alpha(d, &law),
            c_dky: constant_cdky(d, k, &law),
            c0: constant_c0(d, &law),
        };
        write(out, c, "out")
    })
}

/// Radius scale `r_t` of the schedule at intensity `t > 1`; `variant` is
/// one of the [`SpbmVariant`] values.
///
/// # Safety
/// `law` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spbm_scaling_radius(
    t: f64,
    d: usize,
    k: usize,
    beta: f64,
    variant: u32,
    law: *const c_char,
    out: *mut f64,
) -> SpbmStatus {
    guard(|| {
        let law = law_from(law)?;
        let v = match variant {
            v if v == SpbmVariant::HallJanson as u32 => ScheduleVariant::HallJanson,
            v if v == SpbmVariant::Corrected as u32 => ScheduleVariant::Corrected,
            v => return Err(Fail(SpbmStatus::InvalidArgument, format!("unknown schedule variant {v}"))),
        };
        let sched = ScalingSchedule::new(d, k, beta, v)?;
        write(out, scaling_radius(t, &sched, &law)?, "out")
    })
}
