//! C ABI over the maxent library.
//!
//! Handles are opaque boxed pointers freed by their `*_free` function.
//! Fallible calls return an [`MxStatus`]; on failure a human-readable
//! message is stored per thread and readable via [`mx_last_error`].
//! Price queries return quiet NaN on invalid handles instead of a status.

// Validation uses `!(x > 0.0)` so that NaN fails alongside nonpositives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use maxent::density::Density;
use maxent::quotes::{build_slice, read_quote_file, validate_slice, MaturitySlice};
use maxent::{bk, med, mred, Error, Prior};

/// Call outcome. Anything but `Ok` leaves a message in [`mx_last_error`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MxStatus {
    /// Success.
    Ok = 0,
    /// Null pointer, bad length, or an argument outside its domain.
    InvalidArgument = 1,
    /// The inputs admit arbitrage or fail slice validation.
    Arbitrage = 2,
    /// A solver failed to converge or the density is not integrable.
    NonConvergence = 3,
    /// A query argument is outside the representable range.
    OutOfRange = 4,
    /// File I/O or parse failure.
    Io = 5,
    /// An internal invariant was violated; the library state is still valid.
    Panic = 6,
}

/// Opaque validated market slice (undiscounted prices, zero strike included).
pub struct MxSlice(MaturitySlice);

// One long-lived allocation per handle; the size spread between the
// calibrated density kinds is not worth an extra indirection.
#[allow(clippy::large_enum_variant)]
enum Inner {
    Med(med::MedDensity),
    Mred(mred::MredDensity),
    Bk(bk::BkDensity),
}

/// Opaque calibrated density.
pub struct MxDensity(Inner);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let owned = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn status_of(e: &Error) -> MxStatus {
    match e {
        Error::Validation { .. } | Error::Arbitrage { .. } => MxStatus::Arbitrage,
        Error::Integrability | Error::NonConvergence { .. } => MxStatus::NonConvergence,
        Error::OutOfRange(_) => MxStatus::OutOfRange,
        Error::Io(_) => MxStatus::Io,
        _ => MxStatus::InvalidArgument,
    }
}

/// Run a fallible body behind a panic guard, translating errors to statuses.
fn guarded(f: impl FnOnce() -> Result<(), Error>) -> MxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MxStatus::Ok,
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            MxStatus::Panic
        }
    }
}

fn invalid(message: &str) -> MxStatus {
    set_error(message);
    MxStatus::InvalidArgument
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread; never free it.
#[no_mangle]
pub extern "C" fn mx_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn array<'a>(ptr: *const f64, len: usize) -> Option<&'a [f64]> {
    if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

/// Build a validated slice from undiscounted price arrays of length `len`
/// that include the synthetic zero strike: `strikes[0] = 0`,
/// `calls[0]` = forward, `digitals[0] = 1`.
///
/// # Safety
/// The three arrays must be readable for `len` elements and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mx_slice_new(
    strikes: *const f64,
    calls: *const f64,
    digitals: *const f64,
    len: usize,
    maturity: f64,
    discount_factor: f64,
    out: *mut *mut MxSlice,
) -> MxStatus {
    if out.is_null() || len == 0 {
        return invalid("mx_slice_new: null output pointer or empty arrays");
    }
    let (Some(k), Some(c), Some(d)) = (array(strikes, len), array(calls, len), array(digitals, len))
    else {
        return invalid("mx_slice_new: null input array");
    };
    guarded(|| {
        if !(maturity > 0.0) {
            return Err(Error::Domain(format!("maturity {maturity} must be > 0")));
        }
        if !(discount_factor > 0.0 && discount_factor <= 1.0) {
            return Err(Error::Domain(format!(
                "discount factor {discount_factor} not in (0, 1]"
            )));
        }
        let slice = MaturitySlice {
            maturity,
            discount_factor,
            strikes: k.to_vec(),
            calls: c.to_vec(),
            digitals: d.to_vec(),
        };
        let violations = validate_slice(&slice);
        if !violations.is_empty() {
            return Err(Error::Validation { violations });
        }
        out.write(Box::into_raw(Box::new(MxSlice(slice))));
        Ok(())
    })
}

/// Read a quote CSV (same format as the CLI) into a validated slice.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mx_slice_from_file(
    path: *const c_char,
    out: *mut *mut MxSlice,
) -> MxStatus {
    if path.is_null() || out.is_null() {
        return invalid("mx_slice_from_file: null argument");
    }
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        return invalid("mx_slice_from_file: path is not valid UTF-8");
    };
    let path = path.to_owned();
    guarded(move || {
        let parsed = read_quote_file(std::path::Path::new(&path))?;
        let maturity = parsed
            .meta
            .maturity
            .ok_or_else(|| Error::Domain("quote file lacks a #meta T= entry".into()))?;
        let df = parsed.meta.discount_factor.unwrap_or(1.0);
        let slice = build_slice(&parsed.quotes, df, maturity, parsed.meta.forward)?;
        out.write(Box::into_raw(Box::new(MxSlice(slice))));
        Ok(())
    })
}

/// Free a slice handle. Null is a no-op.
///
/// # Safety
/// `slice` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mx_slice_free(slice: *mut MxSlice) {
    if !slice.is_null() {
        drop(Box::from_raw(slice));
    }
}

/// Free a density handle. Null is a no-op.
///
/// # Safety
/// `density` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mx_density_free(density: *mut MxDensity) {
    if !density.is_null() {
        drop(Box::from_raw(density));
    }
}

unsafe fn emit(out: *mut *mut MxDensity, inner: Inner) {
    out.write(Box::into_raw(Box::new(MxDensity(inner))));
}

/// Maximum-entropy density from the slice's calls and digitals.
///
/// # Safety
/// `slice` must be a live slice handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mx_med_calibrate(
    slice: *const MxSlice,
    out: *mut *mut MxDensity,
) -> MxStatus {
    let Some(slice) = slice.as_ref() else {
        return invalid("mx_med_calibrate: null slice");
    };
    if out.is_null() {
        return invalid("mx_med_calibrate: null output pointer");
    }
    guarded(|| {
        emit(out, Inner::Med(med::calibrate(&slice.0)?));
        Ok(())
    })
}

/// Calls-only maximum-entropy density from arrays of length `len` that
/// include the zero strike (`strikes[0] = 0`, `calls[0]` = forward).
///
/// # Safety
/// The arrays must be readable for `len` elements and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mx_bk_calibrate(
    strikes: *const f64,
    calls: *const f64,
    len: usize,
    out: *mut *mut MxDensity,
) -> MxStatus {
    if out.is_null() || len == 0 {
        return invalid("mx_bk_calibrate: null output pointer or empty arrays");
    }
    let (Some(k), Some(c)) = (array(strikes, len), array(calls, len)) else {
        return invalid("mx_bk_calibrate: null input array");
    };
    guarded(|| {
        emit(out, Inner::Bk(bk::calibrate(k, c)?));
        Ok(())
    })
}

/// Minimum relative-entropy density against a log-normal prior with the
/// slice's forward and maturity.
///
/// # Safety
/// `slice` must be a live slice handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mx_mred_calibrate_lognormal(
    slice: *const MxSlice,
    sigma: f64,
    out: *mut *mut MxDensity,
) -> MxStatus {
    let Some(slice) = slice.as_ref() else {
        return invalid("mx_mred_calibrate_lognormal: null slice");
    };
    if out.is_null() {
        return invalid("mx_mred_calibrate_lognormal: null output pointer");
    }
    guarded(|| {
        if !(sigma > 0.0) {
            return Err(Error::Domain(format!("sigma {sigma} must be > 0")));
        }
        let prior = Prior::LogNormal {
            forward: slice.0.forward(),
            sigma,
            maturity: slice.0.maturity,
        };
        emit(out, Inner::Mred(mred::calibrate(&slice.0, prior)?));
        Ok(())
    })
}

/// Minimum relative-entropy density against a piecewise-exponential prior
/// (`prior` must be a density from [`mx_med_calibrate`]).
///
/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mx_mred_calibrate_med_prior(
    slice: *const MxSlice,
    prior: *const MxDensity,
    out: *mut *mut MxDensity,
) -> MxStatus {
    let (Some(slice), Some(prior)) = (slice.as_ref(), prior.as_ref()) else {
        return invalid("mx_mred_calibrate_med_prior: null handle");
    };
    if out.is_null() {
        return invalid("mx_mred_calibrate_med_prior: null output pointer");
    }
    let Inner::Med(prior) = &prior.0 else {
        return invalid("mx_mred_calibrate_med_prior: prior is not a calls+digitals density");
    };
    guarded(|| {
        emit(out, Inner::Mred(mred::calibrate_med_prior(&slice.0, prior)?));
        Ok(())
    })
}

fn as_density(density: &MxDensity) -> &dyn Density {
    match &density.0 {
        Inner::Med(d) => d,
        Inner::Mred(d) => d,
        Inner::Bk(d) => d,
    }
}

unsafe fn query(density: *const MxDensity, f: impl Fn(&dyn Density) -> f64) -> f64 {
    match density.as_ref() {
        Some(d) => catch_unwind(AssertUnwindSafe(|| f(as_density(d)))).unwrap_or(f64::NAN),
        None => f64::NAN,
    }
}

/// Density value at `x`; NaN on a null handle.
///
/// # Safety
/// `density` must be null or a live density handle.
#[no_mangle]
pub unsafe extern "C" fn mx_density_pdf(density: *const MxDensity, x: f64) -> f64 {
    query(density, |d| d.pdf(x))
}

/// Undiscounted call price; NaN on a null handle.
///
/// # Safety
/// `density` must be null or a live density handle.
#[no_mangle]
pub unsafe extern "C" fn mx_density_call(density: *const MxDensity, strike: f64) -> f64 {
    query(density, |d| d.call(strike))
}

/// Undiscounted digital price; NaN on a null handle.
///
/// # Safety
/// `density` must be null or a live density handle.
#[no_mangle]
pub unsafe extern "C" fn mx_density_digital(density: *const MxDensity, strike: f64) -> f64 {
    query(density, |d| d.digital(strike))
}

/// CDF at `x`; NaN on a null handle.
///
/// # Safety
/// `density` must be null or a live density handle.
#[no_mangle]
pub unsafe extern "C" fn mx_density_cdf(density: *const MxDensity, x: f64) -> f64 {
    query(density, |d| d.cdf(x))
}

/// Spot delta of the call at `strike` for discount factor `df`; NaN on a
/// null handle.
///
/// # Safety
/// `density` must be null or a live density handle.
#[no_mangle]
pub unsafe extern "C" fn mx_density_delta(
    density: *const MxDensity,
    strike: f64,
    df: f64,
) -> f64 {
    query(density, |d| d.delta(strike, df))
}

/// Inverse CDF at `level` in [0, 1); writes the quantile to `out`.
///
/// # Safety
/// `density` must be a live density handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mx_density_inverse_cdf(
    density: *const MxDensity,
    level: f64,
    out: *mut f64,
) -> MxStatus {
    let Some(density) = density.as_ref() else {
        return invalid("mx_density_inverse_cdf: null density");
    };
    if out.is_null() {
        return invalid("mx_density_inverse_cdf: null output pointer");
    }
    guarded(|| {
        out.write(as_density(density).inverse_cdf(level)?);
        Ok(())
    })
}

/// Fill `out` with `n` inverse-transform samples from a seeded deterministic
/// stream; the same `(seed, n)` always yields the same values.
///
/// # Safety
/// `density` must be a live density handle and `out` writable for `n`
/// elements.
#[no_mangle]
pub unsafe extern "C" fn mx_density_sample(
    density: *const MxDensity,
    n: usize,
    seed: u64,
    out: *mut f64,
) -> MxStatus {
    let Some(density) = density.as_ref() else {
        return invalid("mx_density_sample: null density");
    };
    if out.is_null() && n > 0 {
        return invalid("mx_density_sample: null output pointer");
    }
    guarded(|| {
        let draws = as_density(density).sample(n, seed);
        std::ptr::copy_nonoverlapping(draws.as_ptr(), out, n);
        Ok(())
    })
}

/// Number of parameter rows reported by [`mx_density_params`].
///
/// # Safety
/// `density` must be null or a live density handle.
#[no_mangle]
pub unsafe extern "C" fn mx_density_param_count(density: *const MxDensity) -> usize {
    match density.as_ref() {
        Some(d) => match &d.0 {
            Inner::Med(m) => m.buckets.len(),
            Inner::Mred(m) => m.bounds.len(),
            Inner::Bk(b) => b.strikes.len(),
        },
        None => 0,
    }
}

/// Write parameter rows as `count` consecutive `(position, a, b)` triples:
/// bucket `(lower, alpha, beta)` for maximum-entropy densities, bound
/// `(lower, gamma, delta)` for relative-entropy densities, and
/// `(strike, lambda, 0)` for calls-only densities.
///
/// # Safety
/// `density` must be a live density handle and `out` writable for
/// `3 * mx_density_param_count(density)` elements.
#[no_mangle]
pub unsafe extern "C" fn mx_density_params(
    density: *const MxDensity,
    out: *mut f64,
) -> MxStatus {
    let Some(density) = density.as_ref() else {
        return invalid("mx_density_params: null density");
    };
    if out.is_null() {
        return invalid("mx_density_params: null output pointer");
    }
    let rows: Vec<[f64; 3]> = match &density.0 {
        Inner::Med(m) => m
            .buckets
            .iter()
            .map(|b| [b.lower, b.alpha, b.beta])
            .collect(),
        Inner::Mred(m) => (0..m.bounds.len())
            .map(|i| [m.bounds[i], m.gammas[i], m.deltas[i]])
            .collect(),
        Inner::Bk(b) => b
            .strikes
            .iter()
            .zip(&b.lambdas)
            .map(|(k, l)| [*k, *l, 0.0])
            .collect(),
    };
    std::ptr::copy_nonoverlapping(rows.as_ptr() as *const f64, out, 3 * rows.len());
    MxStatus::Ok
}

/// Boltzmann-Shannon entropy; fails unless the density is maximum-entropy.
///
/// # Safety
/// `density` must be a live density handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mx_density_entropy(
    density: *const MxDensity,
    out: *mut f64,
) -> MxStatus {
    let Some(density) = density.as_ref() else {
        return invalid("mx_density_entropy: null density");
    };
    if out.is_null() {
        return invalid("mx_density_entropy: null output pointer");
    }
    match &density.0 {
        Inner::Med(m) => {
            out.write(m.entropy());
            MxStatus::Ok
        }
        _ => invalid("mx_density_entropy: not a calls+digitals density"),
    }
}

/// I-divergence to the prior; fails unless the density is relative-entropy.
///
/// # Safety
/// `density` must be a live density handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mx_density_divergence(
    density: *const MxDensity,
    out: *mut f64,
) -> MxStatus {
    let Some(density) = density.as_ref() else {
        return invalid("mx_density_divergence: null density");
    };
    if out.is_null() {
        return invalid("mx_density_divergence: null output pointer");
    }
    match &density.0 {
        Inner::Mred(m) => {
            out.write(m.divergence());
            MxStatus::Ok
        }
        _ => invalid("mx_density_divergence: not a relative-entropy density"),
    }
}

/// Normalizing constant of a calls-only density; fails for other kinds.
///
/// # Safety
/// `density` must be a live density handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mx_density_normalizer(
    density: *const MxDensity,
    out: *mut f64,
) -> MxStatus {
    let Some(density) = density.as_ref() else {
        return invalid("mx_density_normalizer: null density");
    };
    if out.is_null() {
        return invalid("mx_density_normalizer: null output pointer");
    }
    match &density.0 {
        Inner::Bk(b) => {
            out.write(b.mu);
            MxStatus::Ok
        }
        _ => invalid("mx_density_normalizer: not a calls-only density"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use maxent::bs::{bs_call, bs_digital};
    use std::ptr;

    fn flat_arrays(strikes: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut k = vec![0.0];
        let mut c = vec![100.0];
        let mut d = vec![1.0];
        for &s in strikes {
            k.push(s);
            c.push(bs_call(100.0, s, 0.25, 1.0));
            d.push(bs_digital(100.0, s, 0.25, 1.0));
        }
        (k, c, d)
    }

    unsafe fn make_slice(strikes: &[f64]) -> *mut MxSlice {
        let (k, c, d) = flat_arrays(strikes);
        let mut slice = ptr::null_mut();
        let status = mx_slice_new(
            k.as_ptr(),
            c.as_ptr(),
            d.as_ptr(),
            k.len(),
            1.0,
            1.0,
            &mut slice,
        );
        assert_eq!(status, MxStatus::Ok);
        slice
    }

    #[test]
    fn med_round_trip_through_the_c_abi() {
        unsafe {
            let slice = make_slice(&[60.0, 100.0, 140.0]);
            let mut density = ptr::null_mut();
            assert_eq!(mx_med_calibrate(slice, &mut density), MxStatus::Ok);

            assert_abs_diff_eq!(mx_density_call(density, 0.0), 100.0, epsilon = 1e-10);
            assert_abs_diff_eq!(
                mx_density_call(density, 100.0),
                bs_call(100.0, 100.0, 0.25, 1.0),
                epsilon = 1e-10
            );
            assert_abs_diff_eq!(
                mx_density_digital(density, 140.0),
                bs_digital(100.0, 140.0, 0.25, 1.0),
                epsilon = 1e-10
            );
            assert!(mx_density_pdf(density, 100.0) > 0.0);
            assert_abs_diff_eq!(
                mx_density_cdf(density, 100.0) + mx_density_digital(density, 100.0),
                1.0,
                epsilon = 1e-12
            );

            let mut entropy = 0.0;
            assert_eq!(mx_density_entropy(density, &mut entropy), MxStatus::Ok);
            assert_abs_diff_eq!(entropy, 4.6143, epsilon = 5e-4);

            let count = mx_density_param_count(density);
            assert_eq!(count, 4);
            let mut params = vec![0.0; 3 * count];
            assert_eq!(
                mx_density_params(density, params.as_mut_ptr()),
                MxStatus::Ok
            );
            assert_eq!(params[0], 0.0);
            assert!(params[1] > 0.0);

            mx_density_free(density);
            mx_slice_free(slice);
        }
    }

    #[test]
    fn inverse_cdf_and_sampling_are_deterministic() {
        unsafe {
            let slice = make_slice(&[100.0]);
            let mut density = ptr::null_mut();
            assert_eq!(mx_med_calibrate(slice, &mut density), MxStatus::Ok);

            let mut x = 0.0;
            assert_eq!(
                mx_density_inverse_cdf(density, 0.5497, &mut x),
                MxStatus::Ok
            );
            assert_abs_diff_eq!(x, 100.0, epsilon = 0.01);
            assert_eq!(
                mx_density_inverse_cdf(density, 1.5, &mut x),
                MxStatus::OutOfRange
            );

            let mut a = vec![0.0; 64];
            let mut b = vec![0.0; 64];
            assert_eq!(
                mx_density_sample(density, 64, 7, a.as_mut_ptr()),
                MxStatus::Ok
            );
            assert_eq!(
                mx_density_sample(density, 64, 7, b.as_mut_ptr()),
                MxStatus::Ok
            );
            assert_eq!(a, b);

            mx_density_free(density);
            mx_slice_free(slice);
        }
    }

    #[test]
    fn bk_calibration_matches_the_two_point_multipliers() {
        unsafe {
            let strikes = [0.0, 100.0];
            let calls = [100.0, 9.9477];
            let mut density = ptr::null_mut();
            assert_eq!(
                mx_bk_calibrate(strikes.as_ptr(), calls.as_ptr(), 2, &mut density),
                MxStatus::Ok
            );
            let mut mu = 0.0;
            assert_eq!(mx_density_normalizer(density, &mut mu), MxStatus::Ok);
            assert_abs_diff_eq!(mu, 5290.62, epsilon = 0.5);
            let mut params = [0.0; 6];
            assert_eq!(
                mx_density_params(density, params.as_mut_ptr()),
                MxStatus::Ok
            );
            assert_abs_diff_eq!(params[1], 0.048747, epsilon = 1e-4);
            assert_abs_diff_eq!(params[4], -0.098626, epsilon = 1e-4);
            mx_density_free(density);
        }
    }

    #[test]
    fn mred_against_both_prior_kinds() {
        unsafe {
            let slice = make_slice(&[100.0]);

            let mut tilted = ptr::null_mut();
            assert_eq!(
                mx_mred_calibrate_lognormal(slice, 0.25, &mut tilted),
                MxStatus::Ok
            );
            let mut divergence = f64::NAN;
            assert_eq!(
                mx_density_divergence(tilted, &mut divergence),
                MxStatus::Ok
            );
            assert_abs_diff_eq!(divergence, 0.0, epsilon = 1e-9);

            let mut med = ptr::null_mut();
            assert_eq!(mx_med_calibrate(slice, &mut med), MxStatus::Ok);
            let mut relative = ptr::null_mut();
            assert_eq!(
                mx_mred_calibrate_med_prior(slice, med, &mut relative),
                MxStatus::Ok
            );
            let mut self_divergence = f64::NAN;
            assert_eq!(
                mx_density_divergence(relative, &mut self_divergence),
                MxStatus::Ok
            );
            assert_abs_diff_eq!(self_divergence, 0.0, epsilon = 1e-12);
            // Using a calls-only density as the prior is a usage error.
            let mut wrong = ptr::null_mut();
            assert_eq!(
                mx_mred_calibrate_med_prior(slice, tilted, &mut wrong),
                MxStatus::InvalidArgument
            );

            mx_density_free(relative);
            mx_density_free(med);
            mx_density_free(tilted);
            mx_slice_free(slice);
        }
    }

    #[test]
    fn invalid_inputs_report_status_and_message() {
        unsafe {
            // Digitals not decreasing: arbitrage.
            let k = [0.0, 50.0, 100.0];
            let c = [100.0, 60.0, 30.0];
            let d = [1.0, 0.4, 0.6];
            let mut slice = ptr::null_mut();
            let status = mx_slice_new(k.as_ptr(), c.as_ptr(), d.as_ptr(), 3, 1.0, 1.0, &mut slice);
            assert_eq!(status, MxStatus::Arbitrage);
            let message = CStr::from_ptr(mx_last_error()).to_str().unwrap();
            assert!(!message.is_empty());

            // Null pointers are invalid arguments, and queries yield NaN.
            assert_eq!(
                mx_slice_new(ptr::null(), c.as_ptr(), d.as_ptr(), 3, 1.0, 1.0, &mut slice),
                MxStatus::InvalidArgument
            );
            assert!(mx_density_call(ptr::null(), 100.0).is_nan());
            assert_eq!(mx_density_param_count(ptr::null()), 0);
            mx_slice_free(ptr::null_mut());
            mx_density_free(ptr::null_mut());
        }
    }
}
