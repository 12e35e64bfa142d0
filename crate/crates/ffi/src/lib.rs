//! C ABI over `onebit_relay`.
//!
//! Scenarios live behind an opaque `OnebitConfig` handle. Every fallible call
//! returns an `OnebitStatus`; on failure `onebit_last_error_message` describes
//! the most recent error on the calling thread. Powers are linear.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use onebit_relay::channel::SystemConfig;
use onebit_relay::closed_form::corollary_rate;
use onebit_relay::numerics::SimRng;
use onebit_relay::power_alloc::successive_approx;
use onebit_relay::relay_mc::{approx_rate_mc, exact_rate_mc};
use onebit_relay::report::{HardwareCase, RateReport};
use onebit_relay::Error;

/// Result codes. `Ok` is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnebitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Output buffer length differs from the number of user pairs.
    BufferSize = 3,
    Numerical = 4,
    Infeasible = 5,
    Io = 6,
    Panic = 7,
}

/// Opaque scenario handle.
pub struct OnebitConfig {
    inner: SystemConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: OnebitStatus, msg: impl Into<String>) -> OnebitStatus {
    set_last_error(msg);
    status
}

fn status_of(e: &Error) -> OnebitStatus {
    match e {
        Error::InvalidConfig { .. } | Error::UnsupportedOrder(_) | Error::DimensionMismatch(_) => {
            OnebitStatus::InvalidArgument
        }
        Error::Io(_) | Error::Csv(_) => OnebitStatus::Io,
        Error::Infeasible(_) => OnebitStatus::Infeasible,
        Error::Domain(_) | Error::Singular { .. } | Error::NonConvergence { .. } | Error::Degenerate(_) => {
            OnebitStatus::Numerical
        }
    }
}

fn guard(f: impl FnOnce() -> Result<(), OnebitStatus>) -> OnebitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            OnebitStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(OnebitStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: onebit_relay::Result<T>) -> Result<T, OnebitStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn config_ref<'a>(cfg: *const OnebitConfig) -> Result<&'a OnebitConfig, OnebitStatus> {
    cfg.as_ref().ok_or_else(|| fail(OnebitStatus::NullPointer, "config handle is null"))
}

unsafe fn config_mut<'a>(cfg: *mut OnebitConfig) -> Result<&'a mut OnebitConfig, OnebitStatus> {
    cfg.as_mut().ok_or_else(|| fail(OnebitStatus::NullPointer, "config handle is null"))
}

unsafe fn out_slice<'a>(ptr: *mut f64, len: usize, k: usize, what: &str) -> Result<&'a mut [f64], OnebitStatus> {
    if ptr.is_null() {
        return Err(fail(OnebitStatus::NullPointer, format!("{what} is null")));
    }
    if len != k {
        return Err(fail(OnebitStatus::BufferSize, format!("{what} has length {len}, expected K = {k}")));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

unsafe fn in_slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], OnebitStatus> {
    if ptr.is_null() {
        return Err(fail(OnebitStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

fn hw_case(code: u32) -> Result<HardwareCase, OnebitStatus> {
    match code {
        1 => Ok(HardwareCase::I),
        2 => Ok(HardwareCase::II),
        3 => Ok(HardwareCase::III),
        4 => Ok(HardwareCase::IV),
        other => Err(fail(OnebitStatus::InvalidArgument, format!("hardware case {other} is not in 1..=4"))),
    }
}

/// Message for the last failed call on this thread, or NULL after a
/// successful call. Valid until the next call into this library.
#[no_mangle]
pub extern "C" fn onebit_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn onebit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Symmetric scenario: unit large-scale fading, identity pilots,
/// `tau_c = 200`, `tau_p = K`. Returns NULL on invalid input.
#[no_mangle]
pub extern "C" fn onebit_config_new(m: usize, k: usize, p_s: f64, p_r: f64, p_p: f64) -> *mut OnebitConfig {
    let mut out = ptr::null_mut();
    guard(|| {
        let inner = SystemConfig::symmetric(m, k, p_s, p_r, p_p);
        lift(inner.validate())?;
        out = Box::into_raw(Box::new(OnebitConfig { inner }));
        Ok(())
    });
    out
}

/// Parses a scenario in `key = value` form over the defaults.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn onebit_config_parse(text: *const c_char, out: *mut *mut OnebitConfig) -> OnebitStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return Err(fail(OnebitStatus::NullPointer, "text or out is null"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| fail(OnebitStatus::InvalidArgument, "text is not UTF-8"))?;
        let inner = lift(SystemConfig::from_kv_str(text))?;
        *out = Box::into_raw(Box::new(OnebitConfig { inner }));
        Ok(())
    })
}

/// # Safety
/// `cfg` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn onebit_config_free(cfg: *mut OnebitConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Applies one `key=value` setting, e.g. `"p_S=5dB"` or `"pilot_kind=hadamard"`.
/// The handle is unchanged on failure.
///
/// # Safety
/// `cfg` must be a live handle and `assignment` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn onebit_config_set(cfg: *mut OnebitConfig, assignment: *const c_char) -> OnebitStatus {
    guard(|| {
        let cfg = config_mut(cfg)?;
        if assignment.is_null() {
            return Err(fail(OnebitStatus::NullPointer, "assignment is null"));
        }
        let s = CStr::from_ptr(assignment)
            .to_str()
            .map_err(|_| fail(OnebitStatus::InvalidArgument, "assignment is not UTF-8"))?;
        cfg.inner = lift(cfg.inner.with_overrides(&[s]))?;
        Ok(())
    })
}

/// Sets per-user source powers; `len` must equal K.
///
/// # Safety
/// `cfg` must be a live handle and `p_s` must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn onebit_config_set_source_powers(
    cfg: *mut OnebitConfig,
    p_s: *const f64,
    len: usize,
) -> OnebitStatus {
    guard(|| {
        let cfg = config_mut(cfg)?;
        let p = in_slice(p_s, len, "p_s")?;
        let mut next = cfg.inner.clone();
        next.p_s = p.to_vec();
        lift(next.validate())?;
        cfg.inner = next;
        Ok(())
    })
}

/// Sets both hops' large-scale fading; each array holds `len = K` entries.
///
/// # Safety
/// `cfg` must be a live handle; `beta_sr` and `beta_rd` must point to `len`
/// readable doubles each.
#[no_mangle]
pub unsafe extern "C" fn onebit_config_set_large_scale(
    cfg: *mut OnebitConfig,
    beta_sr: *const f64,
    beta_rd: *const f64,
    len: usize,
) -> OnebitStatus {
    guard(|| {
        let cfg = config_mut(cfg)?;
        let sr = in_slice(beta_sr, len, "beta_sr")?;
        let rd = in_slice(beta_rd, len, "beta_rd")?;
        let mut next = cfg.inner.clone();
        next.beta_sr = sr.to_vec();
        next.beta_rd = rd.to_vec();
        lift(next.validate())?;
        cfg.inner = next;
        Ok(())
    })
}

/// Number of user pairs K, or 0 for a NULL handle.
///
/// # Safety
/// `cfg` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn onebit_config_users(cfg: *const OnebitConfig) -> usize {
    cfg.as_ref().map_or(0, |c| c.inner.k)
}

unsafe fn write_report(
    r: &RateReport,
    with_prefactor: bool,
    per_user: *mut f64,
    std_err: *mut f64,
    len: usize,
    sum: *mut f64,
) -> Result<(), OnebitStatus> {
    let r = if with_prefactor { r.clone() } else { r.without_prefactor() };
    let k = r.users();
    out_slice(per_user, len, k, "per_user")?.copy_from_slice(&r.per_user_rate);
    if !std_err.is_null() {
        out_slice(std_err, len, k, "std_err")?.copy_from_slice(&r.std_err);
    }
    if !sum.is_null() {
        *sum = r.sum_rate;
    }
    Ok(())
}

/// Closed-form per-user rates (bits/s/Hz) for hardware case 1..=4
/// (I: ideal converters, IV: one-bit ADCs and DACs). `sum` may be NULL.
///
/// # Safety
/// `cfg` must be a live handle; `per_user` must point to `len` writable
/// doubles; `sum` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn onebit_closed_form_rate(
    cfg: *const OnebitConfig,
    hw: u32,
    with_prefactor: bool,
    per_user: *mut f64,
    len: usize,
    sum: *mut f64,
) -> OnebitStatus {
    guard(|| {
        let cfg = config_ref(cfg)?;
        let report = lift(corollary_rate(&cfg.inner, hw_case(hw)?))?;
        write_report(&report, with_prefactor, per_user, ptr::null_mut(), len, sum)
    })
}

/// Monte-Carlo rates for one-bit ADCs and DACs. `exact` selects per-realization
/// converter statistics instead of the large-array approximation. `std_err`
/// and `sum` may be NULL. Results depend only on `seed` and `trials`.
///
/// # Safety
/// `cfg` must be a live handle; `per_user` (and `std_err` unless NULL) must
/// point to `len` writable doubles; `sum` must be NULL or writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn onebit_mc_rate(
    cfg: *const OnebitConfig,
    trials: usize,
    seed: u64,
    exact: bool,
    with_prefactor: bool,
    per_user: *mut f64,
    std_err: *mut f64,
    len: usize,
    sum: *mut f64,
) -> OnebitStatus {
    guard(|| {
        let cfg = config_ref(cfg)?;
        let mut rng = SimRng::new(seed, 0);
        let report = if exact {
            lift(exact_rate_mc(&cfg.inner, trials, &mut rng))?
        } else {
            lift(approx_rate_mc(&cfg.inner, trials, &mut rng))?
        };
        write_report(&report, with_prefactor, per_user, std_err, len, sum)
    })
}

/// Sum-rate-maximizing powers for one-bit ADCs and DACs under
/// `sum(p_s) + p_r <= total_power`. Returns `Infeasible` when no allocation
/// is found; `p_r` and `sum_rate` may be NULL.
///
/// # Safety
/// `cfg` must be a live handle; `p_s` must point to `len` writable doubles;
/// `p_r` and `sum_rate` must be NULL or writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn onebit_power_alloc(
    cfg: *const OnebitConfig,
    total_power: f64,
    epsilon: f64,
    theta: f64,
    p_s: *mut f64,
    len: usize,
    p_r: *mut f64,
    sum_rate: *mut f64,
) -> OnebitStatus {
    guard(|| {
        let cfg = config_ref(cfg)?;
        let res = lift(successive_approx(&cfg.inner, total_power, epsilon, theta))?;
        out_slice(p_s, len, cfg.inner.k, "p_s")?.copy_from_slice(&res.p_s);
        if !p_r.is_null() {
            *p_r = res.p_r;
        }
        if !sum_rate.is_null() {
            *sum_rate = res.sum_rate;
        }
        Ok(())
    })
}
