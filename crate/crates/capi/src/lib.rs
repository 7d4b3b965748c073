//! C ABI for the rlp toolkit.
//!
//! Conventions, mirrored in the generated `include/rlp.h`:
//!
//! * Every fallible function returns an [`RlpStatus`]; success is `0`.
//! * Objects cross the boundary as opaque handles allocated here and released
//!   through the matching `*_free` function exactly once.
//! * On failure a thread-local message is recorded; read it with
//!   [`rlp_last_error_message`] before the next call on the same thread.
//! * Output buffers are allocated by the caller and passed with their length.
//!
//! Panics are caught at the boundary and reported as
//! [`RlpStatus::InternalPanic`] instead of unwinding into foreign frames.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nalgebra::{DMatrix, DVector};
use rlp_core::cv::estimate_sigma2;
use rlp_core::data::{standardize, Dataset};
use rlp_core::interval::{destandardize, IntervalSet};
use rlp_core::lasso::{fit_lasso_path, LambdaGrid, LassoConfig, LassoFit};
use rlp_core::posterior::rlp_intervals;
use rlp_core::rng::RngStream;
use rlp_core::sim::cv_pipeline;
use rlp_core::{Error, Result};

/// Outcome of a call. Zero is success; anything else is an error whose
/// detail is available from `rlp_last_error_message`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RlpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument or the data shape was rejected.
    InvalidArgument = 2,
    /// A numerical routine failed to converge or lost definiteness.
    NumericalError = 3,
    /// A solution was produced but failed its optimality check.
    CertificationError = 4,
    /// Too many stochastic replications failed.
    SimulationError = 5,
    /// Reading or writing external data failed.
    IoError = 6,
    /// A panic was caught at the language boundary.
    InternalPanic = 7,
}

/// Design matrix plus response, owned by the library.
pub struct RlpDataset {
    data: Dataset,
}

/// Result of interval construction, owned by the library.
pub struct RlpIntervals {
    set: IntervalSet,
}

/// One confidence interval, copied out by value.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct RlpInterval {
    /// Zero-based column of the design matrix.
    pub variable: usize,
    /// Penalized point estimate at the fitted penalty.
    pub lasso_estimate: f64,
    /// Relaxed estimate the interval is centered around.
    pub beta_tilde: f64,
    pub lower: f64,
    pub upper: f64,
    /// Effective sample size after projecting off the other selected columns.
    pub n_tilde: f64,
    /// Whether the penalized fit kept this variable.
    pub selected: bool,
    /// No usable information for this coordinate; endpoints are infinite.
    pub degenerate: bool,
}

/// Options for interval construction. Start from `rlp_ci_options_default`
/// and override fields as needed.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct RlpCiOptions {
    /// Central coverage level, strictly between 0 and 1.
    pub level: f64,
    /// Penalty to fit at. Any negative value selects the penalty by
    /// cross-validation instead.
    pub lambda: f64,
    /// Noise variance. Any nonpositive value estimates it from the residuals
    /// of the fitted model.
    pub sigma2: f64,
    /// Folds used when the penalty is cross-validated.
    pub cv_folds: usize,
    /// Seed for the deterministic stream behind fold assignment.
    pub seed: u64,
    /// Report on the standardized scale instead of raw predictor units.
    pub standardized: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg)
        .unwrap_or_else(|_| CString::new("error message contained a NUL byte").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_for(err: &Error) -> RlpStatus {
    match err {
        Error::Invalid(_) => RlpStatus::InvalidArgument,
        Error::Numerical(_) => RlpStatus::NumericalError,
        Error::Certification(_) => RlpStatus::CertificationError,
        Error::Simulation(_) => RlpStatus::SimulationError,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => RlpStatus::IoError,
    }
}

fn fail(err: Error) -> RlpStatus {
    let status = status_for(&err);
    set_last_error(err.to_string());
    status
}

fn null_arg(name: &str) -> RlpStatus {
    set_last_error(format!("required pointer `{name}` was null"));
    RlpStatus::NullPointer
}

fn caught_panic() -> RlpStatus {
    set_last_error("internal panic caught at the C boundary".to_string());
    RlpStatus::InternalPanic
}

/// Version of the library as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rlp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the most recent failure on the calling thread, or null
/// if the last call succeeded. The pointer stays valid until the next
/// library call on the same thread.
#[no_mangle]
pub extern "C" fn rlp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |c| c.as_ptr())
    })
}

/// Create a dataset from caller-owned buffers; the contents are copied.
///
/// `x` is row-major with `n` rows and `p` columns; `y` has length `n`.
///
/// # Safety
///
/// `x` must point to at least `n * p` readable doubles, `y` to at least `n`,
/// and `out` must be a valid location to store the handle. On success the
/// handle must be released with [`rlp_dataset_free`].
#[no_mangle]
pub unsafe extern "C" fn rlp_dataset_new(
    n: usize,
    p: usize,
    x: *const f64,
    y: *const f64,
    out: *mut *mut RlpDataset,
) -> RlpStatus {
    clear_last_error();
    if out.is_null() {
        return null_arg("out");
    }
    if x.is_null() {
        return null_arg("x");
    }
    if y.is_null() {
        return null_arg("y");
    }
    let Some(len) = n.checked_mul(p) else {
        set_last_error(format!("n * p overflows: {n} * {p}"));
        return RlpStatus::InvalidArgument;
    };
    let xs = std::slice::from_raw_parts(x, len);
    let ys = std::slice::from_raw_parts(y, n);
    let built = catch_unwind(AssertUnwindSafe(|| {
        Dataset::new(
            DMatrix::from_row_slice(n, p, xs),
            DVector::from_column_slice(ys),
        )
    }));
    match built {
        Ok(Ok(data)) => {
            *out = Box::into_raw(Box::new(RlpDataset { data }));
            RlpStatus::Ok
        }
        Ok(Err(e)) => fail(e),
        Err(_) => caught_panic(),
    }
}

/// Number of observations in the dataset, or 0 for a null handle.
#[no_mangle]
pub extern "C" fn rlp_dataset_rows(dataset: *const RlpDataset) -> usize {
    unsafe { dataset.as_ref() }.map_or(0, |d| d.data.n())
}

/// Number of predictors in the dataset, or 0 for a null handle.
#[no_mangle]
pub extern "C" fn rlp_dataset_cols(dataset: *const RlpDataset) -> usize {
    unsafe { dataset.as_ref() }.map_or(0, |d| d.data.p())
}

/// Release a dataset handle. Null is ignored.
///
/// # Safety
///
/// `dataset` must be a handle from [`rlp_dataset_new`] that has not been
/// freed already.
#[no_mangle]
pub unsafe extern "C" fn rlp_dataset_free(dataset: *mut RlpDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Defaults: level 0.8, cross-validated penalty, estimated noise variance,
/// 10 folds, seed 0, raw scale.
#[no_mangle]
pub extern "C" fn rlp_ci_options_default() -> RlpCiOptions {
    RlpCiOptions {
        level: 0.8,
        lambda: -1.0,
        sigma2: -1.0,
        cv_folds: 10,
        seed: 0,
        standardized: false,
    }
}

struct Resolved {
    sd: rlp_core::data::StandardizedDesign,
    fit: LassoFit,
    index: usize,
    sigma2_hat: Option<f64>,
}

fn resolve(data: &Dataset, lambda: f64, cv_folds: usize, seed: u64) -> Result<Resolved> {
    let sd = standardize(data)?;
    let cfg = LassoConfig::default();
    if lambda < 0.0 {
        let cvf = cv_pipeline(sd, cv_folds, &cfg, RngStream::root(seed).stream(1))?;
        Ok(Resolved {
            sd: cvf.sd,
            fit: cvf.fit,
            index: cvf.lambda_index,
            sigma2_hat: Some(cvf.sigma2_hat),
        })
    } else {
        let grid = LambdaGrid::single(lambda)?;
        let fit = fit_lasso_path(&sd, &grid, &cfg)?;
        let sigma2_hat = estimate_sigma2(&sd, &fit, 0).ok().map(|s| s.sigma2_hat);
        Ok(Resolved {
            sd,
            fit,
            index: 0,
            sigma2_hat,
        })
    }
}

fn ci_impl(data: &Dataset, opts: &RlpCiOptions) -> Result<IntervalSet> {
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(Error::invalid(format!(
            "level must lie strictly between 0 and 1, got {}",
            opts.level
        )));
    }
    let r = resolve(data, opts.lambda, opts.cv_folds, opts.seed)?;
    let sigma2 = if opts.sigma2 > 0.0 {
        opts.sigma2
    } else {
        r.sigma2_hat.ok_or_else(|| {
            Error::invalid("noise variance could not be estimated; pass sigma2 > 0")
        })?
    };
    let set = rlp_intervals(&r.sd, &r.fit.points[r.index], sigma2, opts.level)?;
    Ok(if opts.standardized {
        set
    } else {
        destandardize(&set, &r.sd)
    })
}

/// Build confidence intervals for every coefficient of `dataset`.
///
/// # Safety
///
/// `dataset` must be a live handle from [`rlp_dataset_new`], `options` must
/// point to a valid options struct, and `out` must be a valid location to
/// store the handle. On success the handle must be released with
/// [`rlp_intervals_free`].
#[no_mangle]
pub unsafe extern "C" fn rlp_ci(
    dataset: *const RlpDataset,
    options: *const RlpCiOptions,
    out: *mut *mut RlpIntervals,
) -> RlpStatus {
    clear_last_error();
    if out.is_null() {
        return null_arg("out");
    }
    let Some(d) = dataset.as_ref() else {
        return null_arg("dataset");
    };
    let Some(opts) = options.as_ref() else {
        return null_arg("options");
    };
    match catch_unwind(AssertUnwindSafe(|| ci_impl(&d.data, opts))) {
        Ok(Ok(set)) => {
            *out = Box::into_raw(Box::new(RlpIntervals { set }));
            RlpStatus::Ok
        }
        Ok(Err(e)) => fail(e),
        Err(_) => caught_panic(),
    }
}

/// Fit penalized coefficients and copy them into a caller buffer.
///
/// A negative `lambda` selects the penalty by cross-validation with
/// `cv_folds` folds and the given `seed`. With `standardized` false the
/// coefficients are on the raw predictor scale and `intercept` (when
/// non-null) receives the fitted intercept; on the standardized scale the
/// intercept is zero by construction. `lambda_used` (when non-null) receives
/// the penalty that was actually fit.
///
/// # Safety
///
/// `dataset` must be a live handle, `coefficients` must point to at least
/// `coefficients_len` writable doubles with `coefficients_len >= p`, and
/// `intercept` / `lambda_used` must each be null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rlp_fit(
    dataset: *const RlpDataset,
    lambda: f64,
    cv_folds: usize,
    seed: u64,
    standardized: bool,
    coefficients: *mut f64,
    coefficients_len: usize,
    intercept: *mut f64,
    lambda_used: *mut f64,
) -> RlpStatus {
    clear_last_error();
    let Some(d) = dataset.as_ref() else {
        return null_arg("dataset");
    };
    if coefficients.is_null() {
        return null_arg("coefficients");
    }
    let p = d.data.p();
    if coefficients_len < p {
        set_last_error(format!(
            "coefficient buffer holds {coefficients_len} values but the design has {p} columns"
        ));
        return RlpStatus::InvalidArgument;
    }
    let run = catch_unwind(AssertUnwindSafe(|| -> Result<(Vec<f64>, f64, f64)> {
        let r = resolve(&d.data, lambda, cv_folds, seed)?;
        let point = &r.fit.points[r.index];
        let (coefs, ic) = if standardized {
            (point.beta.iter().copied().collect(), 0.0)
        } else {
            (
                r.sd.raw_coefficients(&point.beta).iter().copied().collect(),
                r.sd.intercept(&point.beta),
            )
        };
        Ok((coefs, ic, point.lambda))
    }));
    match run {
        Ok(Ok((coefs, ic, lam))) => {
            std::ptr::copy_nonoverlapping(coefs.as_ptr(), coefficients, p);
            if !intercept.is_null() {
                *intercept = ic;
            }
            if !lambda_used.is_null() {
                *lambda_used = lam;
            }
            RlpStatus::Ok
        }
        Ok(Err(e)) => fail(e),
        Err(_) => caught_panic(),
    }
}

/// Number of intervals in the set, or 0 for a null handle.
#[no_mangle]
pub extern "C" fn rlp_intervals_len(intervals: *const RlpIntervals) -> usize {
    unsafe { intervals.as_ref() }.map_or(0, |iv| iv.set.entries.len())
}

/// Coverage level the set was built for, or NaN for a null handle.
#[no_mangle]
pub extern "C" fn rlp_intervals_level(intervals: *const RlpIntervals) -> f64 {
    unsafe { intervals.as_ref() }.map_or(f64::NAN, |iv| iv.set.level)
}

/// Penalty the underlying model was fit at, or NaN for a null handle.
#[no_mangle]
pub extern "C" fn rlp_intervals_lambda(intervals: *const RlpIntervals) -> f64 {
    unsafe { intervals.as_ref() }.map_or(f64::NAN, |iv| iv.set.lambda)
}

/// Noise variance the intervals were built with, or NaN for a null handle.
#[no_mangle]
pub extern "C" fn rlp_intervals_sigma2(intervals: *const RlpIntervals) -> f64 {
    unsafe { intervals.as_ref() }.map_or(f64::NAN, |iv| iv.set.sigma2)
}

/// Number of selected columns dropped from the projection for collinearity,
/// or 0 for a null handle.
#[no_mangle]
pub extern "C" fn rlp_intervals_dropped_len(intervals: *const RlpIntervals) -> usize {
    unsafe { intervals.as_ref() }.map_or(0, |iv| iv.set.dropped.len())
}

/// Copy one interval out by value.
///
/// # Safety
///
/// `intervals` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rlp_intervals_get(
    intervals: *const RlpIntervals,
    index: usize,
    out: *mut RlpInterval,
) -> RlpStatus {
    clear_last_error();
    let Some(iv) = intervals.as_ref() else {
        return null_arg("intervals");
    };
    if out.is_null() {
        return null_arg("out");
    }
    let Some(e) = iv.set.entries.get(index) else {
        set_last_error(format!(
            "interval index {index} out of range for a set of {}",
            iv.set.entries.len()
        ));
        return RlpStatus::InvalidArgument;
    };
    *out = RlpInterval {
        variable: e.index,
        lasso_estimate: e.lasso_estimate,
        beta_tilde: e.beta_tilde,
        lower: e.lower,
        upper: e.upper,
        n_tilde: e.n_tilde,
        selected: e.selected,
        degenerate: e.degenerate,
    };
    RlpStatus::Ok
}

/// Copy all lower and upper endpoints into caller buffers. Either buffer may
/// be null to skip that side.
///
/// # Safety
///
/// `intervals` must be a live handle; each non-null buffer must hold at
/// least `len` writable doubles with `len >= rlp_intervals_len(intervals)`.
#[no_mangle]
pub unsafe extern "C" fn rlp_intervals_bounds(
    intervals: *const RlpIntervals,
    lower: *mut f64,
    upper: *mut f64,
    len: usize,
) -> RlpStatus {
    clear_last_error();
    let Some(iv) = intervals.as_ref() else {
        return null_arg("intervals");
    };
    let m = iv.set.entries.len();
    if len < m {
        set_last_error(format!("buffers hold {len} values but the set has {m} intervals"));
        return RlpStatus::InvalidArgument;
    }
    for (i, e) in iv.set.entries.iter().enumerate() {
        if !lower.is_null() {
            *lower.add(i) = e.lower;
        }
        if !upper.is_null() {
            *upper.add(i) = e.upper;
        }
    }
    RlpStatus::Ok
}

/// Release an interval-set handle. Null is ignored.
///
/// # Safety
///
/// `intervals` must be a handle from [`rlp_ci`] that has not been freed
/// already.
#[no_mangle]
pub unsafe extern "C" fn rlp_intervals_free(intervals: *mut RlpIntervals) {
    if !intervals.is_null() {
        drop(Box::from_raw(intervals));
    }
}
