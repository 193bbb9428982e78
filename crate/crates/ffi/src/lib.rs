//! C ABI over the `stochexp` core.
//!
//! Every function returns an [`SeStatus`]. On failure a message is kept per
//! thread and can be read with [`se_last_error_message`]. Handles are
//! opaque and must be released with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use stochexp::estimators::{self, EstimateReport};
use stochexp::psi::{self, PhiMethod};
use stochexp::wick;
use stochexp::{Error, IntegrandSpec, NovikovVerdict, PathBundle, Scheme, SeedSpec, TimeGrid};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Singular = 4,
    Divergent = 5,
    Capacity = 6,
    TooFewSamples = 7,
    Numerical = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeScheme {
    Exact = 0,
    Em = 1,
}

/// Flat copy of an estimate. `target` is NaN and `pass` is -1 when the
/// quantity has no closed-form target.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub target: f64,
    pub oracle_std_error: f64,
    pub n: u64,
    pub pass: i32,
}

/// Opaque integrand ψ.
pub struct SeIntegrand(IntegrandSpec);

/// Opaque set of simulated paths.
pub struct SeBundle(PathBundle);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(SeStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Singular { .. } => SeStatus::Singular,
            Error::Divergent { .. } => SeStatus::Divergent,
            Error::Capacity { .. } => SeStatus::Capacity,
            Error::TooFewSamples { .. } => SeStatus::TooFewSamples,
            Error::Quadrature { .. } => SeStatus::Numerical,
            Error::Format(_) => SeStatus::Parse,
            Error::InvalidSpec(_) | Error::InvalidGrid(_) | Error::InvalidArgument(_) | Error::Io(_) => {
                SeStatus::InvalidArgument
            }
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SeStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SeStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(SeStatus::NullPointer, format!("{name} is null"))
}

unsafe fn get<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, name: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn flatten(r: &EstimateReport) -> SeEstimate {
    SeEstimate {
        estimate: r.estimate,
        std_error: r.std_error,
        ci_low: r.ci_low,
        ci_high: r.ci_high,
        target: r.target.unwrap_or(f64::NAN),
        oracle_std_error: r.oracle_std_error.unwrap_or(f64::NAN),
        n: r.n as u64,
        pass: r.pass.map_or(-1, i32::from),
    }
}

/// Message for the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn se_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn se_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses an integrand from its JSON form, e.g.
/// `{"kind": "constant", "params": [1]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out_handle` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn se_integrand_from_json(json: *const c_char, out_handle: *mut *mut SeIntegrand) -> SeStatus {
    guard(|| {
        let slot = out(out_handle, "out")?;
        *slot = ptr::null_mut();
        if json.is_null() {
            return Err(null("json"));
        }
        let text =
            CStr::from_ptr(json).to_str().map_err(|e| Failure(SeStatus::Parse, format!("json is not UTF-8: {e}")))?;
        let spec: IntegrandSpec = serde_json::from_str(text).map_err(|e| Failure(SeStatus::Parse, e.to_string()))?;
        *slot = Box::into_raw(Box::new(SeIntegrand(spec)));
        Ok(())
    })
}

/// Constant integrand ψ ≡ c.
///
/// # Safety
/// `out_handle` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn se_integrand_constant(c: f64, out_handle: *mut *mut SeIntegrand) -> SeStatus {
    guard(|| {
        let slot = out(out_handle, "out")?;
        *slot = ptr::null_mut();
        let spec = IntegrandSpec::constant(c);
        spec.validate()?;
        *slot = Box::into_raw(Box::new(SeIntegrand(spec)));
        Ok(())
    })
}

/// # Safety
/// `handle` must be null or come from an `se_integrand_*` constructor and
/// not have been freed.
#[no_mangle]
pub unsafe extern "C" fn se_integrand_free(handle: *mut SeIntegrand) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn se_eval_psi(handle: *const SeIntegrand, t: f64, value: *mut f64) -> SeStatus {
    guard(|| {
        let spec = &get(handle, "integrand")?.0;
        *out(value, "value")? = psi::eval_psi(spec, t)?;
        Ok(())
    })
}

/// `φ(t) = ∫₀ᵗ ψ² du` with the default method and tolerance.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn se_phi(handle: *const SeIntegrand, t: f64, value: *mut f64) -> SeStatus {
    guard(|| {
        let spec = &get(handle, "integrand")?.0;
        *out(value, "value")? = psi::phi(spec, t, PhiMethod::Auto, psi::DEFAULT_TOL)?;
        Ok(())
    })
}

/// Novikov check on `[0, t]`. Sets `*divergent` to 0 or 1; `*half_phi`
/// receives ½φ(t) when finite and +inf otherwise.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn se_novikov_check(
    handle: *const SeIntegrand,
    t: f64,
    divergent: *mut i32,
    half_phi: *mut f64,
) -> SeStatus {
    guard(|| {
        let spec = &get(handle, "integrand")?.0;
        let divergent = out(divergent, "divergent")?;
        let half_phi = out(half_phi, "half_phi")?;
        let report = psi::novikov_check(spec, t)?;
        *divergent = i32::from(report.verdict == NovikovVerdict::Divergent);
        *half_phi = report.half_phi.unwrap_or(f64::INFINITY);
        Ok(())
    })
}

/// Simulates `n_paths` paths of Z on the grid `times[0..n_times]`
/// (starting at 0, strictly increasing).
///
/// # Safety
/// `times` must point to `n_times` doubles; other pointers must be valid.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn se_bundle_simulate(
    handle: *const SeIntegrand,
    times: *const f64,
    n_times: usize,
    n_paths: usize,
    seed: u64,
    stream: u64,
    scheme: SeScheme,
    antithetic: bool,
    out_bundle: *mut *mut SeBundle,
) -> SeStatus {
    guard(|| {
        let slot = out(out_bundle, "out")?;
        *slot = ptr::null_mut();
        let spec = &get(handle, "integrand")?.0;
        let grid = TimeGrid::new(slice(times, n_times, "times")?.to_vec())?;
        let scheme = match scheme {
            SeScheme::Exact => Scheme::Exact,
            SeScheme::Em => Scheme::Em,
        };
        let bundle =
            stochexp::paths::simulate(spec, &grid, n_paths, SeedSpec::with_stream(seed, stream), scheme, antithetic)?;
        *slot = Box::into_raw(Box::new(SeBundle(bundle)));
        Ok(())
    })
}

/// # Safety
/// `bundle` must be null or come from [`se_bundle_simulate`] and not have
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn se_bundle_free(bundle: *mut SeBundle) {
    if !bundle.is_null() {
        drop(Box::from_raw(bundle));
    }
}

/// Number of paths, or 0 for a null handle.
///
/// # Safety
/// `bundle` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn se_bundle_n_paths(bundle: *const SeBundle) -> usize {
    bundle.as_ref().map_or(0, |b| b.0.n_paths)
}

/// Number of grid nodes, or 0 for a null handle.
///
/// # Safety
/// `bundle` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn se_bundle_n_nodes(bundle: *const SeBundle) -> usize {
    bundle.as_ref().map_or(0, |b| b.0.n_nodes())
}

/// Copies Z row-major (`n_paths × n_nodes`) into `buf`, which must hold
/// exactly that many doubles.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn se_bundle_copy_z(bundle: *const SeBundle, buf: *mut f64, len: usize) -> SeStatus {
    guard(|| {
        let b = &get(bundle, "bundle")?.0;
        let src = b.z.as_slice();
        if len != src.len() {
            return Err(Failure(
                SeStatus::InvalidArgument,
                format!("buffer holds {len} values, bundle has {}", src.len()),
            ));
        }
        slice_mut(buf, len, "buf")?.copy_from_slice(src);
        Ok(())
    })
}

/// Copies the discrete compensator `φ_N(t_j)` (one value per node).
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn se_bundle_copy_compensator(bundle: *const SeBundle, buf: *mut f64, len: usize) -> SeStatus {
    guard(|| {
        let b = &get(bundle, "bundle")?.0;
        if len != b.compensator.len() {
            return Err(Failure(
                SeStatus::InvalidArgument,
                format!("buffer holds {len} values, grid has {} nodes", b.compensator.len()),
            ));
        }
        slice_mut(buf, len, "buf")?.copy_from_slice(&b.compensator);
        Ok(())
    })
}

/// Estimate of `E|Z(t_j)|^p` at node `t_index` with its closed-form target.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn se_estimate_p_moment(
    bundle: *const SeBundle,
    t_index: usize,
    p: f64,
    result: *mut SeEstimate,
) -> SeStatus {
    guard(|| {
        let b = &get(bundle, "bundle")?.0;
        let result = out(result, "result")?;
        *result = flatten(&estimators::estimate_p_moment(b, t_index, p)?);
        Ok(())
    })
}

/// Binned conditional test of `E[Z(t) | Z(s)] = Z(s)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn se_martingale_test(
    bundle: *const SeBundle,
    s_index: usize,
    t_index: usize,
    n_bins: usize,
    max_abs_gap_in_se: *mut f64,
    pass: *mut i32,
) -> SeStatus {
    guard(|| {
        let b = &get(bundle, "bundle")?.0;
        let gap = out(max_abs_gap_in_se, "max_abs_gap_in_se")?;
        let pass = out(pass, "pass")?;
        let report = estimators::martingale_increment_test(b, s_index, t_index, n_bins)?;
        *gap = report.max_abs_gap_in_se;
        *pass = i32::from(report.pass);
        Ok(())
    })
}

/// m-th moment of a centred Gaussian with the given variance.
///
/// # Safety
/// `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn se_gaussian_moment(variance: f64, m: usize, value: *mut f64) -> SeStatus {
    guard(|| {
        *out(value, "value")? = wick::gaussian_moment(variance, m)?;
        Ok(())
    })
}

/// Number of perfect matchings of m points.
///
/// # Safety
/// `count` must be valid.
#[no_mangle]
pub unsafe extern "C" fn se_pairing_count(m: usize, count: *mut u64) -> SeStatus {
    guard(|| {
        let count = out(count, "count")?;
        *count = u64::try_from(wick::pairing_count(m))
            .map_err(|_| Failure(SeStatus::Capacity, format!("pairing count for m = {m} overflows 64 bits")))?;
        Ok(())
    })
}

/// Truncated moment generating series at β = 1 up to even order `order`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn se_mgf_truncated(
    handle: *const SeIntegrand,
    t: f64,
    order: usize,
    total: *mut f64,
) -> SeStatus {
    guard(|| {
        let spec = &get(handle, "integrand")?.0;
        *out(total, "total")? = wick::mgf_truncated(spec, t, order)?.total;
        Ok(())
    })
}

/// Truncated cumulant series. `terms` receives one value per order
/// `1..=order`, so it must hold `order` doubles.
///
/// # Safety
/// `terms` must point to `n_terms` writable doubles; other pointers must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn se_cgf_truncated(
    handle: *const SeIntegrand,
    t: f64,
    order: usize,
    terms: *mut f64,
    n_terms: usize,
    total: *mut f64,
) -> SeStatus {
    guard(|| {
        let spec = &get(handle, "integrand")?.0;
        let total = out(total, "total")?;
        let cgf = wick::cgf_truncated(spec, t, order)?;
        if n_terms != cgf.orders.len() {
            return Err(Failure(
                SeStatus::InvalidArgument,
                format!("terms holds {n_terms} values, series has {}", cgf.orders.len()),
            ));
        }
        for (dst, (_, v)) in slice_mut(terms, n_terms, "terms")?.iter_mut().zip(&cgf.orders) {
            *dst = *v;
        }
        *total = cgf.total;
        Ok(())
    })
}

/// Compares `ln(MGF_M)` with `CGF_M` against the truncation bound.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn se_log_relation(
    handle: *const SeIntegrand,
    t: f64,
    order: usize,
    gap: *mut f64,
    bound: *mut f64,
    pass: *mut i32,
) -> SeStatus {
    guard(|| {
        let spec = &get(handle, "integrand")?.0;
        let (gap, bound, pass) = (out(gap, "gap")?, out(bound, "bound")?, out(pass, "pass")?);
        let r = wick::check_log_relation(spec, t, order)?;
        *gap = r.gap;
        *bound = r.bound;
        *pass = i32::from(r.pass);
        Ok(())
    })
}
