//! C ABI over `doorway-rmt`.
//!
//! Every function returns a [`DrmStatus`] and writes results through out
//! pointers. On failure the message is kept per thread and can be read
//! with [`drm_last_error`]. Objects are opaque handles released with the
//! matching `_free` function. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use doorway_rmt::analytic::{AnalyticDistribution, Family};
use doorway_rmt::doorway::{sample, Route};
use doorway_rmt::ensembles::{a_factor, BackgroundKind, Beta, ChaoticSampler, EnsembleSpec, InteractionKind};
use doorway_rmt::oracles::kernel_at_zero;
use doorway_rmt::stats::{ks_distance, ks_two_sample, EmpiricalDistribution};
use doorway_rmt::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DrmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Numeric = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

pub const DRM_FAMILY_REGULAR_BETA1: u32 = 0;
pub const DRM_FAMILY_REGULAR_BETA2: u32 = 1;
pub const DRM_FAMILY_GOE: u32 = 2;
pub const DRM_FAMILY_GUE: u32 = 3;

pub const DRM_BACKGROUND_REGULAR: u32 = 0;
pub const DRM_BACKGROUND_GOE: u32 = 1;
pub const DRM_BACKGROUND_GUE: u32 = 2;

pub const DRM_INTERACTION_GAUSSIAN: u32 = 0;
pub const DRM_INTERACTION_UNIFORM: u32 = 1;
pub const DRM_INTERACTION_SEMICIRCLE: u32 = 2;

pub const DRM_ROUTE_FIDELITY: u32 = 0;
pub const DRM_ROUTE_MAX_OVERLAP: u32 = 1;

/// Closed-form distribution of one family at one coupling.
pub struct DrmAnalytic(AnalyticDistribution);

/// Ensemble parameters from which overlap samples are drawn.
pub struct DrmSampler(EnsembleSpec);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(DrmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Domain(_) => DrmStatus::Domain,
            ref e if e.is_numeric() => DrmStatus::Numeric,
            _ => DrmStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(DrmStatus::InvalidArgument, msg.into())
}

fn set_last_error(msg: &str) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DrmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            DrmStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(&format!("internal panic: {msg}"));
            DrmStatus::Panic
        }
    }
}

fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(DrmStatus::NullPointer, "output pointer is null".into()));
    }
    // SAFETY: non-null and, by the caller's contract, valid for writes.
    unsafe { out.write(value) };
    Ok(())
}

fn slice<'a>(data: *const f64, len: usize) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(Failure(DrmStatus::NullPointer, "input buffer is null".into()));
    }
    // SAFETY: non-null and, by the caller's contract, `len` readable values.
    Ok(unsafe { std::slice::from_raw_parts(data, len) })
}

fn handle<'a, T>(h: *const T) -> Result<&'a T, Failure> {
    // SAFETY: handles come from `Box::into_raw` in this crate.
    unsafe { h.as_ref() }.ok_or_else(|| Failure(DrmStatus::NullPointer, "handle is null".into()))
}

fn family(code: u32) -> Result<Family, Failure> {
    match code {
        DRM_FAMILY_REGULAR_BETA1 => Ok(Family::RegularBeta1),
        DRM_FAMILY_REGULAR_BETA2 => Ok(Family::RegularBeta2),
        DRM_FAMILY_GOE => Ok(Family::Goe),
        DRM_FAMILY_GUE => Ok(Family::Gue),
        other => Err(invalid(format!("unknown family code {other}"))),
    }
}

fn background(code: u32) -> Result<BackgroundKind, Failure> {
    match code {
        DRM_BACKGROUND_REGULAR => Ok(BackgroundKind::Regular),
        DRM_BACKGROUND_GOE => Ok(BackgroundKind::Goe),
        DRM_BACKGROUND_GUE => Ok(BackgroundKind::Gue),
        other => Err(invalid(format!("unknown background code {other}"))),
    }
}

fn interaction(code: u32) -> Result<InteractionKind, Failure> {
    match code {
        DRM_INTERACTION_GAUSSIAN => Ok(InteractionKind::Gaussian),
        DRM_INTERACTION_UNIFORM => Ok(InteractionKind::Uniform),
        DRM_INTERACTION_SEMICIRCLE => Ok(InteractionKind::Semicircle),
        other => Err(invalid(format!("unknown interaction code {other}"))),
    }
}

fn beta(b: u32) -> Result<Beta, Failure> {
    u8::try_from(b)
        .map_err(|_| invalid(format!("beta must be 1 or 2, got {b}")))?
        .try_into()
        .map_err(invalid)
}

fn route(code: u32) -> Result<Route, Failure> {
    match code {
        DRM_ROUTE_FIDELITY => Ok(Route::Fidelity),
        DRM_ROUTE_MAX_OVERLAP => Ok(Route::MaxOverlap),
        other => Err(invalid(format!("unknown route code {other}"))),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn drm_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version contains NUL"),
        };
    VERSION.as_ptr()
}

/// Message of the last failed call on this thread, or "" after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn drm_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// First-moment factor `⟨|V|⟩ / √⟨|V|²⟩` of an interaction law.
///
/// # Safety
/// Pointers must be null or valid for the documented reads and writes;
/// handles must be live.
#[no_mangle]
pub unsafe extern "C" fn drm_a_factor(interaction_kind: u32, beta_index: u32, out: *mut f64) -> DrmStatus {
    guard(|| write(out, a_factor(interaction(interaction_kind)?, beta(beta_index)?)))
}

/// Hermite kernel `K_N(0, 0)`.
///
/// # Safety
/// Pointers must be null or valid for the documented reads and writes;
/// handles must be live.
#[no_mangle]
pub unsafe extern "C" fn drm_kernel_at_zero(n: usize, out: *mut f64) -> DrmStatus {
    guard(|| write(out, kernel_at_zero(n)?))
}

/// Creates a closed-form distribution. Regular families take `a_beta` in
/// (0, 1]; pass NaN to use the Gaussian value. Other families ignore it.
///
/// # Safety
/// Pointers must be null or valid for the documented reads and writes;
/// handles must be live.
#[no_mangle]
pub unsafe extern "C" fn drm_analytic_new(
    family_code: u32,
    lambda: f64,
    a_beta: f64,
    out: *mut *mut DrmAnalytic,
) -> DrmStatus {
    guard(|| {
        let family = family(family_code)?;
        let a = match family {
            Family::RegularBeta1 if a_beta.is_nan() => Some(a_factor(InteractionKind::Gaussian, Beta::Real)),
            Family::RegularBeta2 if a_beta.is_nan() => {
                Some(a_factor(InteractionKind::Gaussian, Beta::Complex))
            }
            _ => Some(a_beta),
        };
        let dist = AnalyticDistribution::new(family, lambda, a)?;
        write(out, Box::into_raw(Box::new(DrmAnalytic(dist))))
    })
}

/// # Safety
/// `h` must be null or a live handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn drm_analytic_free(h: *mut DrmAnalytic) {
    if !h.is_null() {
        // SAFETY: created by `drm_analytic_new` and freed at most once.
        drop(unsafe { Box::from_raw(h) });
    }
}

/// # Safety
/// Pointers must be null or valid for the documented reads and writes;
/// handles must be live.
#[no_mangle]
pub unsafe extern "C" fn drm_analytic_pdf(h: *const DrmAnalytic, c: f64, out: *mut f64) -> DrmStatus {
    guard(|| write(out, handle(h)?.0.pdf(c)?))
}

/// # Safety
/// Pointers must be null or valid for the documented reads and writes;
/// handles must be live.
#[no_mangle]
pub unsafe extern "C" fn drm_analytic_cdf(h: *const DrmAnalytic, c: f64, out: *mut f64) -> DrmStatus {
    guard(|| write(out, handle(h)?.0.cdf(c)?))
}

/// # Safety
/// Pointers must be null or valid for the documented reads and writes;
/// handles must be live.
#[no_mangle]
pub unsafe extern "C" fn drm_analytic_quantile(h: *const DrmAnalytic, p: f64, out: *mut f64) -> DrmStatus {
    guard(|| write(out, handle(h)?.0.quantile(p)?))
}

/// KS distance between `n` samples in [0, 1] and the distribution.
///
/// # Safety
/// Pointers must be null or valid for the documented reads and writes;
/// handles must be live.
#[no_mangle]
pub unsafe extern "C" fn drm_analytic_ks(
    h: *const DrmAnalytic,
    samples: *const f64,
    n: usize,
    out: *mut f64,
) -> DrmStatus {
    guard(|| {
        let dist = &handle(h)?.0;
        let emp = EmpiricalDistribution::new(slice(samples, n)?.to_vec())?;
        let failure = RefCell::new(None);
        let d = ks_distance(&emp, |c| {
            dist.cdf(c).unwrap_or_else(|e| {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            })
        })?;
        match failure.into_inner() {
            Some(e) => Err(e.into()),
            None => write(out, d),
        }
    })
}

/// Two-sample KS distance between samples in [0, 1].
///
/// # Safety
/// Pointers must be null or valid for the documented reads and writes;
/// handles must be live.
#[no_mangle]
pub unsafe extern "C" fn drm_ks_two_sample(
    a: *const f64,
    n_a: usize,
    b: *const f64,
    n_b: usize,
    out: *mut f64,
) -> DrmStatus {
    guard(|| {
        let a = EmpiricalDistribution::new(slice(a, n_a)?.to_vec())?;
        let b = EmpiricalDistribution::new(slice(b, n_b)?.to_vec())?;
        write(out, ks_two_sample(&a, &b)?)
    })
}

/// Creates a sampler with `w = 1` and the coupling set from `lambda`.
///
/// # Safety
/// Pointers must be null or valid for the documented reads and writes;
/// handles must be live.
#[no_mangle]
pub unsafe extern "C" fn drm_sampler_new(
    background_kind: u32,
    n_levels: usize,
    interaction_kind: u32,
    beta_index: u32,
    lambda: f64,
    seed: u64,
    out: *mut *mut DrmSampler,
) -> DrmStatus {
    guard(|| {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Failure(
                DrmStatus::Domain,
                format!("lambda must be positive, got {lambda}"),
            ));
        }
        let spec = EnsembleSpec {
            background_kind: background(background_kind)?,
            n_levels,
            w: 1.0,
            interaction_kind: interaction(interaction_kind)?,
            beta: beta(beta_index)?,
            v: 0.0,
            seed,
            chaotic_sampler: ChaoticSampler::Tridiagonal,
        }
        .with_lambda(lambda);
        spec.validate()?;
        write(out, Box::into_raw(Box::new(DrmSampler(spec))))
    })
}

/// # Safety
/// `h` must be null or a live handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn drm_sampler_free(h: *mut DrmSampler) {
    if !h.is_null() {
        // SAFETY: created by `drm_sampler_new` and freed at most once.
        drop(unsafe { Box::from_raw(h) });
    }
}

/// Fills `out[0..n]` with overlap samples `0..n` of the sampler's stream.
/// Identical arguments give identical values.
///
/// # Safety
/// Pointers must be null or valid for the documented reads and writes;
/// handles must be live.
#[no_mangle]
pub unsafe extern "C" fn drm_sampler_draw(
    h: *const DrmSampler,
    route_code: u32,
    n: usize,
    out: *mut f64,
    capacity: usize,
) -> DrmStatus {
    guard(|| {
        let spec = &handle(h)?.0;
        let route = route(route_code)?;
        if out.is_null() {
            return Err(Failure(DrmStatus::NullPointer, "output buffer is null".into()));
        }
        if capacity < n {
            return Err(Failure(
                DrmStatus::BufferTooSmall,
                format!("buffer holds {capacity} values, {n} requested"),
            ));
        }
        let values = sample(spec, n, route)?.values();
        // SAFETY: non-null, and the caller guarantees `capacity >= n` slots.
        unsafe { ptr::copy_nonoverlapping(values.as_ptr(), out, values.len()) };
        Ok(())
    })
}
